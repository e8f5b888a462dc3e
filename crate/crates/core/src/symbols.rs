//! Bidirectional token ↔ label mapping shared by lattices and indexes.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SymbolError;

/// Numeric arc label.
pub type Label = u32;

/// The null symbol.
pub const EPSILON: Label = 0;
/// The wildcard matcher; only ever appears on index input labels.
pub const SIGMA: Label = 1;

pub const EPSILON_TOKEN: &str = "<eps>";
pub const SIGMA_TOKEN: &str = "<sigma>";

/// Append-only symbol table with dense ids. Ids 0 and 1 are reserved for
/// ε and σ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    tokens: Vec<String>,
    ids: HashMap<String, Label>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut table = SymbolTable {
            tokens: Vec::new(),
            ids: HashMap::new(),
        };
        table.push(EPSILON_TOKEN);
        table.push(SIGMA_TOKEN);
        table
    }

    fn push(&mut self, token: &str) -> Label {
        let id = self.tokens.len() as Label;
        self.tokens.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    /// Returns the id of `token`, assigning the next free id if it is new.
    pub fn intern(&mut self, token: &str) -> Label {
        match self.ids.get(token) {
            Some(&id) => id,
            None => self.push(token),
        }
    }

    pub fn get(&self, token: &str) -> Option<Label> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, label: Label) -> Option<&str> {
        self.tokens.get(label as usize).map(String::as_str)
    }

    /// Token for a label known to be in range.
    pub fn resolve(&self, label: Label) -> &str {
        self.tokens[label as usize].as_str()
    }

    pub fn contains_label(&self, label: Label) -> bool {
        (label as usize) < self.tokens.len()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false: the reserved symbols are present from construction.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (i as Label, t.as_str()))
    }

    /// Interns every token of `other` and returns the relabeling
    /// `other-id → self-id`.
    pub fn merge(&mut self, other: &SymbolTable) -> Vec<Label> {
        other.tokens.iter().map(|t| self.intern(t)).collect()
    }

    /// Builds a table from `(token, id)` pairs, e.g. a parsed symbol file.
    /// Ids must be dense and the reserved ids must carry the reserved tokens.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, SymbolError>
    where
        I: IntoIterator<Item = (S, Label)>,
        S: Into<String>,
    {
        let mut slots: Vec<Option<String>> = Vec::new();
        for (token, id) in pairs {
            let token = token.into();
            let idx = id as usize;
            if slots.len() <= idx {
                slots.resize(idx + 1, None);
            }
            if slots[idx].is_some() {
                return Err(SymbolError::DuplicateId(id));
            }
            slots[idx] = Some(token);
        }
        let mut table = SymbolTable {
            tokens: Vec::with_capacity(slots.len()),
            ids: HashMap::new(),
        };
        for (idx, slot) in slots.into_iter().enumerate() {
            let token = slot.ok_or(SymbolError::Gap(idx as Label))?;
            let reserved = match idx as Label {
                EPSILON => Some(EPSILON_TOKEN),
                SIGMA => Some(SIGMA_TOKEN),
                _ => None,
            };
            match reserved {
                Some(expected) if token != expected => {
                    return Err(SymbolError::Reserved {
                        id: idx as Label,
                        token,
                    })
                }
                None if token == EPSILON_TOKEN || token == SIGMA_TOKEN => {
                    return Err(SymbolError::Reserved {
                        id: idx as Label,
                        token,
                    })
                }
                _ => {}
            }
            if table.ids.contains_key(&token) {
                return Err(SymbolError::DuplicateToken(token));
            }
            table.push(&token);
        }
        if table.tokens.len() < 2 {
            return Err(SymbolError::Gap(table.tokens.len() as Label));
        }
        Ok(table)
    }

    /// Parses the `token id` per line symbol-file format.
    pub fn parse(text: &str) -> Result<Self, SymbolError> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(token), Some(id), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(SymbolError::Malformed { line: lineno + 1 });
            };
            let id: Label = id
                .parse()
                .map_err(|_| SymbolError::Malformed { line: lineno + 1 })?;
            pairs.push((token.to_string(), id));
        }
        Self::from_pairs(pairs)
    }

    /// Inverse of [`SymbolTable::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, token) in self.iter() {
            out.push_str(token);
            out.push(' ');
            out.push_str(&id.to_string());
            out.push('\n');
        }
        out
    }
}

impl Serialize for SymbolTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.tokens.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymbolTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(deserializer)?;
        SymbolTable::from_pairs(tokens.into_iter().enumerate().map(|(i, t)| (t, i as Label)))
            .map_err(serde::de::Error::custom)
    }
}
