use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::annotation::{path_annotations, Annotation};
use super::segment::{segment, SegmentKind};
use crate::annotate::AnnotatedLattice;
use crate::error::AnnotateError;
use crate::fst::{best_path, count_between, enumerate_between, ArcRef, Path};
use crate::weight::Weight;

/// Default cap on the number of sub-paths enumerated per parallel segment.
pub const DEFAULT_SEGMENT_LIMIT: usize = 1_000_000;

/// Selection criteria of a candidate path, compared in field order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathScore {
    /// Longest annotation in intent words.
    pub longest: usize,
    /// Number of annotations.
    pub count: usize,
    /// Longest annotation span, blanks included.
    pub span: usize,
    /// Path cost; lower wins.
    pub weight: Weight,
}

impl PathScore {
    pub fn new(annotations: &[Annotation], weight: Weight) -> Self {
        PathScore {
            longest: annotations.iter().map(Annotation::intent_words).max().unwrap_or(0),
            count: annotations.len(),
            span: annotations.iter().map(Annotation::span).max().unwrap_or(0),
            weight,
        }
    }

    /// `Greater` means `self` is preferred.
    pub fn compare(&self, other: &PathScore) -> Ordering {
        self.longest
            .cmp(&other.longest)
            .then(self.count.cmp(&other.count))
            .then(self.span.cmp(&other.span))
            .then(other.weight.cost().total_cmp(&self.weight.cost()))
    }
}

/// Index of the preferred candidate; the first one wins ties.
pub fn select_best(candidates: &[(Path, Vec<Annotation>)]) -> Result<usize, AnnotateError> {
    let scores: Vec<PathScore> = candidates
        .iter()
        .map(|(p, a)| PathScore::new(a, p.weight))
        .collect();
    best_index(&scores).ok_or(AnnotateError::NoCandidates)
}

fn best_index(scores: &[PathScore]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s.compare(&scores[b]) == Ordering::Greater) {
            best = Some(i);
        }
    }
    best
}

enum Piece {
    Fixed(ArcRef),
    Choice(Vec<Path>, Vec<(usize, usize, usize)>),
}

#[derive(Clone)]
struct Partial {
    count: usize,
    weight: Weight,
    choices: Vec<usize>,
}

impl Partial {
    // `true` when `self` should replace `other` under the same key
    fn beats(&self, other: &Partial) -> bool {
        match self.count.cmp(&other.count) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match other.weight.cost().total_cmp(&self.weight.cost()) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => self.choices < other.choices,
            },
        }
    }
}

/// Chooses the path of an annotated (conversation) lattice.
///
/// Parallel segments are enumerated separately (never across segment
/// boundaries). Each sub-path is summarised by its longest annotation,
/// annotation count, longest span and cost; a dynamic program over
/// segments keyed by (longest, span) so far keeps the best (count, cost)
/// per key, which makes the result identical to applying [`select_best`]
/// to every complete path.
pub fn resolve_conversation(annotated: &AnnotatedLattice, limit: usize) -> Result<Path, AnnotateError> {
    let fst = &annotated.fst;
    let lattice_best = best_path(&annotated.lattice)?;
    let best = annotated
        .find_plain_path(&lattice_best.arcs)
        .ok_or(AnnotateError::BestPathMissing)?;
    let segments = segment(fst)?;
    let mut closing = vec![None; fst.num_states()];
    for seg in &segments {
        if seg.kind == SegmentKind::Parallel {
            closing[seg.first] = Some(seg.last);
        }
    }

    let mut pieces = Vec::new();
    let mut k = 0;
    while k < best.arcs.len() {
        let a = best.arcs[k];
        match closing[a.state] {
            Some(last) => {
                let count = count_between(fst, a.state, last)?;
                if count > limit as u128 {
                    return Err(AnnotateError::SegmentLimit {
                        state: a.state,
                        count,
                        limit: limit as u128,
                    });
                }
                let paths = enumerate_between(fst, a.state, last, limit)?;
                let stats = paths
                    .iter()
                    .map(|p| {
                        let s = PathScore::new(&path_annotations(annotated, p), p.weight);
                        (s.longest, s.count, s.span)
                    })
                    .collect();
                pieces.push(Piece::Choice(paths, stats));
                while k < best.arcs.len() && best.arcs[k].state != last {
                    k += 1;
                }
            }
            None => {
                pieces.push(Piece::Fixed(a));
                k += 1;
            }
        }
    }

    let mut table: BTreeMap<(usize, usize), Partial> = BTreeMap::new();
    table.insert(
        (0, 0),
        Partial {
            count: 0,
            weight: Weight::ONE,
            choices: Vec::new(),
        },
    );
    for piece in &pieces {
        match piece {
            Piece::Fixed(a) => {
                let w = fst.arc(*a).weight;
                for p in table.values_mut() {
                    p.weight = p.weight.times(w);
                }
            }
            Piece::Choice(paths, stats) => {
                let mut next: BTreeMap<(usize, usize), Partial> = BTreeMap::new();
                for (&(longest, span), p) in &table {
                    for (i, (path, &(l, c, s))) in paths.iter().zip(stats).enumerate() {
                        let mut weight = p.weight;
                        for t in path.transitions(fst) {
                            weight = weight.times(t.weight);
                        }
                        let mut choices = p.choices.clone();
                        choices.push(i);
                        let cand = Partial {
                            count: p.count + c,
                            weight,
                            choices,
                        };
                        let key = (longest.max(l), span.max(s));
                        match next.get(&key) {
                            Some(cur) if !cand.beats(cur) => {}
                            _ => {
                                next.insert(key, cand);
                            }
                        }
                    }
                }
                table = next;
            }
        }
    }

    let final_weight = fst
        .final_weight(fst.finals().next().ok_or(AnnotateError::BestPathMissing)?)
        .unwrap_or(Weight::ONE);
    let mut winner: Option<(PathScore, &Vec<usize>)> = None;
    for (&(longest, span), p) in &table {
        let score = PathScore {
            longest,
            count: p.count,
            span,
            weight: p.weight.times(final_weight),
        };
        let better = match &winner {
            None => true,
            Some((w, choices)) => match score.compare(w) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => p.choices < **choices,
            },
        };
        if better {
            winner = Some((score, &p.choices));
        }
    }
    let (score, choices) = winner.ok_or(AnnotateError::NoCandidates)?;

    let mut arcs = Vec::with_capacity(best.arcs.len());
    let mut choice = choices.iter();
    for piece in &pieces {
        match piece {
            Piece::Fixed(a) => arcs.push(*a),
            Piece::Choice(paths, _) => {
                let i = *choice.next().expect("one choice per segment");
                arcs.extend_from_slice(&paths[i].arcs);
            }
        }
    }
    Ok(Path {
        arcs,
        weight: score.weight,
    })
}
