use std::collections::HashSet;

use super::annotation::{annotations_on_lattice_path, Annotation};
use super::segment::{segment, Segment, SegmentKind};
use crate::annotate::{annotate, prune_quota, AnnotatedLattice};
use crate::error::AnnotateError;
use crate::fst::{best_path, ArcRef, Fst, Path};
use crate::index::IndexTransducer;
use crate::symbols::{SymbolTable, EPSILON};

/// Default minimum number of intent words for an annotation to count.
pub const DEFAULT_MIN_SPAN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Word of the original best path.
    Original,
    /// Word chosen instead of the best-path hypothesis.
    Rescored,
}

/// Final transcript of a lattice with its annotations and the best-path
/// baseline for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct RescoredTranscript {
    pub words: Vec<String>,
    pub provenance: Vec<Provenance>,
    /// Lattice arc of every transcript word.
    pub word_arcs: Vec<ArcRef>,
    /// Full lattice path, ε arcs included.
    pub lattice_path: Vec<ArcRef>,
    pub annotations: Vec<Annotation>,
    pub baseline_words: Vec<String>,
    pub baseline_word_arcs: Vec<ArcRef>,
    pub baseline_annotations: Vec<Annotation>,
}

impl RescoredTranscript {
    pub fn text(&self) -> String {
        self.words.join(" ")
    }

    pub fn rescored_words(&self) -> usize {
        self.provenance.iter().filter(|p| **p == Provenance::Rescored).count()
    }
}

/// Best-path words, their lattice arcs and their annotations.
pub type Baseline = (Vec<String>, Vec<ArcRef>, Vec<Annotation>);

/// Annotations of the best path, computed on their own: the best path is
/// turned into a single-path lattice, composed with the index and
/// quota-pruned. Returns the words, their lattice arcs and the annotations
/// with at least `min_span` intent words.
pub fn baseline(
    lattice: &Fst,
    symbols: &SymbolTable,
    index: &IndexTransducer,
    min_span: usize,
) -> Result<Baseline, AnnotateError> {
    let best = best_path(lattice)?;
    let word_arcs: Vec<ArcRef> = best
        .arcs
        .iter()
        .copied()
        .filter(|&a| lattice.arc(a).ilabel != EPSILON)
        .collect();
    let labels: Vec<_> = word_arcs.iter().map(|&a| lattice.arc(a).ilabel).collect();
    let words = labels.iter().map(|&l| symbols.resolve(l).to_string()).collect();
    let single = Fst::linear(&labels, &[]);
    let raw = annotate(&single, symbols, index)?;
    let pruned = prune_quota(&raw)?;
    let chain: Vec<ArcRef> = (0..labels.len()).map(|state| ArcRef { state, index: 0 }).collect();
    let annotations = annotations_on_lattice_path(&pruned, &chain)
        .into_iter()
        .map(|(a, _)| a)
        .filter(|a| a.intent_words() >= min_span)
        .collect();
    Ok((words, word_arcs, annotations))
}

fn check_path(annotated: &AnnotatedLattice, path: &Path) -> Result<(), AnnotateError> {
    let fst = &annotated.fst;
    let mut s = fst.start().ok_or(AnnotateError::ChosenPathMissing)?;
    for a in &path.arcs {
        if a.state != s || a.index >= fst.arcs(s).len() {
            return Err(AnnotateError::ChosenPathMissing);
        }
        s = fst.arc(*a).next;
    }
    if fst.is_final(s) {
        Ok(())
    } else {
        Err(AnnotateError::ChosenPathMissing)
    }
}

// Lattice arcs of `path` inside parallel segment `seg`.
fn segment_lattice_arcs(annotated: &AnnotatedLattice, path: &Path, seg: &Segment) -> Vec<ArcRef> {
    path.arcs
        .iter()
        .filter(|a| seg.first <= a.state && a.state < seg.last)
        .filter_map(|&a| annotated.origin(a))
        .collect()
}

fn kept(annotated: &AnnotatedLattice, lattice_path: &[ArcRef], min_span: usize) -> Vec<(Annotation, usize)> {
    annotations_on_lattice_path(annotated, lattice_path)
        .into_iter()
        .filter(|(a, _)| a.intent_words() >= min_span)
        .collect()
}

/// Builds the transcript for `chosen`, a path of `annotated`.
///
/// The annotated lattice is restricted to the chosen word sequence and
/// every annotation on it is collected; annotations with fewer than
/// `min_span` intent words are dropped. A parallel segment whose rescored
/// words keep no annotation, or fewer than the best path keeps there,
/// falls back to the best-path words.
pub fn extract(
    annotated: &AnnotatedLattice,
    chosen: &Path,
    min_span: usize,
) -> Result<RescoredTranscript, AnnotateError> {
    check_path(annotated, chosen)?;
    let lattice = &annotated.lattice;
    let lattice_best = best_path(lattice)?;
    let best = annotated
        .find_plain_path(&lattice_best.arcs)
        .ok_or(AnnotateError::BestPathMissing)?;
    let segments = segment(&annotated.fst)?;
    let parallel: Vec<&Segment> = segments.iter().filter(|s| s.kind == SegmentKind::Parallel).collect();
    let seg_index = |state: usize| parallel.iter().position(|s| s.first <= state && state < s.last);

    let chosen_arcs = annotated.lattice_arcs(chosen);
    let mut count_chosen = vec![0usize; parallel.len()];
    for (_, s) in kept(annotated, &chosen_arcs, min_span) {
        if let Some(k) = seg_index(s) {
            count_chosen[k] += 1;
        }
    }
    let mut count_best = vec![0usize; parallel.len()];
    for (_, s) in kept(annotated, &lattice_best.arcs, min_span) {
        if let Some(k) = seg_index(s) {
            count_best[k] += 1;
        }
    }

    let mut revert = vec![false; parallel.len()];
    for (k, seg) in parallel.iter().enumerate() {
        let differs = segment_lattice_arcs(annotated, chosen, seg) != segment_lattice_arcs(annotated, &best, seg);
        revert[k] = differs && (count_chosen[k] == 0 || count_chosen[k] < count_best[k]);
    }

    let final_arcs: Vec<ArcRef> = if revert.iter().any(|&r| r) {
        let mut out = Vec::with_capacity(chosen_arcs.len());
        let mut k = 0;
        while k < chosen.arcs.len() {
            let a = chosen.arcs[k];
            match seg_index(a.state) {
                Some(j) if revert[j] && a.state == parallel[j].first => {
                    out.extend(segment_lattice_arcs(annotated, &best, parallel[j]));
                    while k < chosen.arcs.len() && chosen.arcs[k].state != parallel[j].last {
                        k += 1;
                    }
                }
                _ => {
                    out.extend(annotated.origin(a));
                    k += 1;
                }
            }
        }
        out
    } else {
        chosen_arcs
    };

    let best_set: HashSet<ArcRef> = lattice_best.arcs.iter().copied().collect();
    let word_arcs: Vec<ArcRef> = final_arcs
        .iter()
        .copied()
        .filter(|&a| lattice.arc(a).ilabel != EPSILON)
        .collect();
    let words: Vec<String> = word_arcs
        .iter()
        .map(|&a| annotated.symbols.resolve(lattice.arc(a).ilabel).to_string())
        .collect();
    let provenance: Vec<Provenance> = word_arcs
        .iter()
        .map(|a| {
            if best_set.contains(a) {
                Provenance::Original
            } else {
                Provenance::Rescored
            }
        })
        .collect();
    let annotations = kept(annotated, &final_arcs, min_span)
        .into_iter()
        .map(|(mut a, _)| {
            a.rescored = provenance[a.start..=a.end].contains(&Provenance::Rescored);
            a
        })
        .collect();

    let (baseline_words, baseline_word_arcs, baseline_annotations) =
        baseline(lattice, &annotated.symbols, annotated.index, min_span)?;
    Ok(RescoredTranscript {
        words,
        provenance,
        word_arcs,
        lattice_path: final_arcs,
        annotations,
        baseline_words,
        baseline_word_arcs,
        baseline_annotations,
    })
}
