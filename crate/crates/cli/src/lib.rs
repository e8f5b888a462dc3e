//! Batch front end: compile intent indexes, rescore corpora of confusion
//! networks and lattices, and compare rescored against best-path
//! annotation counts.

pub mod index_cmd;
pub mod input;
pub mod records;
pub mod rescore_cmd;
pub mod stats;

use std::path::PathBuf;

pub use index_cmd::{build_index_cmd, load_library, IndexConfig};
pub use rescore_cmd::{rescore_cmd, RescoreSummary};
pub use stats::{percent_increase, percentile_table, stats_cmd, StatsReport};

/// Settings of one rescoring run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub index: PathBuf,
    pub inputs: PathBuf,
    pub out: PathBuf,
    /// Minimum number of intent words for an annotation to count.
    pub min_span: usize,
    /// Cap on enumerated sub-paths per parallel segment.
    pub limit: usize,
    /// Rescale confusion network slots whose posteriors do not sum to 1.
    pub renormalize: bool,
    /// Annotate the best path only.
    pub baseline_only: bool,
    /// Abort on the first unreadable conversation.
    pub strict: bool,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(index: impl Into<PathBuf>, inputs: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            index: index.into(),
            inputs: inputs.into(),
            out: out.into(),
            min_span: intent_lattice::bestpath::DEFAULT_MIN_SPAN,
            limit: intent_lattice::bestpath::DEFAULT_SEGMENT_LIMIT,
            renormalize: false,
            baseline_only: false,
            strict: false,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.min_span >= 1, "min-span must be at least 1");
        anyhow::ensure!(self.limit >= 1, "limit must be positive");
        anyhow::ensure!(self.jobs >= 1, "jobs must be positive");
        Ok(())
    }
}
