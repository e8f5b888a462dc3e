use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// Tropical weight: a cost in negative-log-probability space. Paths
/// accumulate by addition and compete by minimum.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(f64);

impl Weight {
    /// Multiplicative identity (probability 1).
    pub const ONE: Weight = Weight(0.0);
    /// Additive identity (impossible).
    pub const ZERO: Weight = Weight(f64::INFINITY);

    pub fn new(cost: f64) -> Self {
        // normalise -0.0 so serialized text stays canonical
        Weight(if cost == 0.0 { 0.0 } else { cost })
    }

    pub fn from_probability(p: f64) -> Self {
        Weight::new(-p.ln())
    }

    pub fn cost(self) -> f64 {
        self.0
    }

    pub fn probability(self) -> f64 {
        (-self.0).exp()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Tropical ⊕.
    pub fn plus(self, other: Weight) -> Weight {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    /// Tropical ⊗.
    pub fn times(self, other: Weight) -> Weight {
        Weight::new(self.0 + other.0)
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::ONE
    }
}

impl Add for Weight {
    type Output = Weight;

    fn add(self, rhs: Weight) -> Weight {
        self.times(rhs)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("Infinity")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semiring_ops() {
        let a = Weight::new(0.5);
        let b = Weight::new(1.25);
        assert_eq!(a.times(b).cost(), 1.75);
        assert_eq!(a.plus(b), a);
        assert_eq!(Weight::ZERO.plus(b), b);
        assert_eq!(Weight::ONE.times(b), b);
    }

    #[test]
    fn probability_roundtrip() {
        let w = Weight::from_probability(0.6);
        assert!((w.probability() - 0.6).abs() < 1e-12);
        assert_eq!(Weight::from_probability(1.0).to_string(), "0");
    }
}
