//! The complete rescoring run for one lattice.

use crate::annotate::{annotate, prune_alternatives, prune_quota};
use crate::bestpath::{extract, resolve_conversation, RescoredTranscript, DEFAULT_MIN_SPAN, DEFAULT_SEGMENT_LIMIT};
use crate::error::AnnotateError;
use crate::fst::{best_path, Fst};
use crate::index::IndexTransducer;
use crate::symbols::SymbolTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RescoreOptions {
    pub min_span: usize,
    /// Sub-path limit per parallel segment.
    pub limit: usize,
}

impl Default for RescoreOptions {
    fn default() -> Self {
        RescoreOptions {
            min_span: DEFAULT_MIN_SPAN,
            limit: DEFAULT_SEGMENT_LIMIT,
        }
    }
}

/// Annotates `lattice`, prunes it, picks the best path by intent evidence
/// and extracts the transcript together with the best-path baseline.
/// `symbols` must extend the index's symbol table.
pub fn rescore(
    lattice: &Fst,
    symbols: &SymbolTable,
    index: &IndexTransducer,
    options: RescoreOptions,
) -> Result<RescoredTranscript, AnnotateError> {
    let raw = annotate(lattice, symbols, index)?;
    let pruned = prune_quota(&raw)?;
    let best = best_path(lattice)?;
    let alternatives = prune_alternatives(&pruned, &best)?;
    let chosen = resolve_conversation(&alternatives, options.limit)?;
    extract(&alternatives, &chosen, options.min_span)
}
