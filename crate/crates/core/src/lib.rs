//! Fuzzy intent spotting in ASR lattices and intent-guided rescoring.
//!
//! A lattice (an acyclic acceptor, usually built from a word confusion
//! network) is composed with an index transducer compiled from a library of
//! intent examples. Matches are marked with begin/continue/end output
//! symbols, filtered by each example's blank quota, and used to pick the
//! transcript variant carrying the strongest intent evidence.

pub mod annotate;
pub mod bestpath;
pub mod compose;
pub mod error;
pub mod fst;
pub mod index;
pub mod lattice_io;
pub mod oracle;
pub mod pipeline;
pub mod symbols;
pub mod synth;
pub mod weight;

pub use annotate::{annotate, prune_alternatives, prune_quota, AnnotatedLattice};
pub use bestpath::{extract, resolve_conversation, segment, select_best, Annotation, RescoredTranscript};
pub use error::{AnnotateError, Error, FstError, LibraryError, ParseError, Result, SymbolError};
pub use fst::{best_path, count_paths, enumerate_paths, ArcRef, Fst, Path, StateId, Transition};
pub use index::{compile, IndexTransducer, IntentLibrary, Token};
pub use pipeline::{rescore, RescoreOptions};
pub use symbols::{Label, SymbolTable, EPSILON, SIGMA};
pub use weight::Weight;
