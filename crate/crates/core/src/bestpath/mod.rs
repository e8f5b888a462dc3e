//! Choosing the final transcript: series/parallel segmentation, the
//! annotation-driven path preference and annotation extraction.

mod annotation;
mod extract;
mod segment;
mod select;

pub use annotation::{annotations_on_lattice_path, path_annotations, Annotation, EntityFill};
pub use extract::{baseline, extract, Baseline, Provenance, RescoredTranscript, DEFAULT_MIN_SPAN};
pub use segment::{degree_sums, segment, Segment, SegmentKind};
pub use select::{resolve_conversation, select_best, PathScore, DEFAULT_SEGMENT_LIMIT};
