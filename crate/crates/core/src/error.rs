use thiserror::Error;

use crate::fst::StateId;
use crate::symbols::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("symbol id {0} assigned twice")]
    DuplicateId(Label),
    #[error("symbol token `{0}` assigned twice")]
    DuplicateToken(String),
    #[error("symbol ids are not dense: id {0} is missing")]
    Gap(Label),
    #[error("reserved symbol id {id} cannot carry token `{token}`")]
    Reserved { id: Label, token: String },
    #[error("line {line}: expected `token id`")]
    Malformed { line: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FstError {
    #[error("fst has no start state")]
    NoStart,
    #[error("state {0} does not exist")]
    InvalidState(StateId),
    #[error("cycle detected through state {0}")]
    Cycle(StateId),
    #[error("fst accepts no path")]
    Empty,
    #[error("fst has no final state")]
    NoFinal,
    #[error("path enumeration limit exceeded after {reached} paths")]
    LimitExceeded { reached: usize },
    #[error("label {0} is not in the shared symbol table")]
    UnknownLabel(Label),
    #[error("wildcard symbol found on a lattice arc leaving state {0}")]
    SigmaInLattice(StateId),
    #[error("lattice arc leaving state {0} is not an acceptor arc")]
    NotAcceptor(StateId),
    #[error("fst is not topologically sorted: arc {from} -> {to}")]
    Unsorted { from: StateId, to: StateId },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("slot {slot} (line {line}): posteriors sum to {sum:.4}, expected 1")]
    PosteriorSum { slot: usize, line: usize, sum: f64 },
    #[error("line {line}: empty slot")]
    EmptySlot { line: usize },
    #[error("confusion network has no words")]
    NoWords,
    #[error("expected a single utterance, found {0}")]
    MultipleUtterances(usize),
    #[error("input contains no utterance")]
    NoUtterance,
    #[error("fst text has no symbol table")]
    MissingSymbols,
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Fst(#[from] FstError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LibraryError {
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("library has no intents")]
    NoIntents,
    #[error("{pointer}: unknown entity placeholder `{token}`")]
    UnresolvedPlaceholder { pointer: String, token: String },
    #[error("{pointer}: duplicate intent id `{id}`")]
    DuplicateIntent { pointer: String, id: String },
    #[error("duplicate example id `{0}`")]
    DuplicateExample(String),
    #[error("{pointer}: example has no tokens")]
    EmptyExample { pointer: String },
    #[error("{pointer}: intent has no examples")]
    EmptyIntent { pointer: String },
    #[error("entity `{0}` has no phrases")]
    EmptyEntity(String),
    #[error("entity `{0}` contains an empty phrase")]
    EmptyPhrase(String),
    #[error("token `{0}` collides with a reserved symbol")]
    ReservedToken(String),
    #[error("no grammar for entity placeholder `{0}`")]
    MissingGrammar(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotateError {
    #[error(transparent)]
    Fst(#[from] FstError),
    #[error("malformed annotation on arc {arc} of state {state}: {reason}")]
    Structure {
        state: StateId,
        arc: usize,
        reason: String,
    },
    #[error("path ends inside an open annotation at state {0}")]
    OpenAnnotation(StateId),
    #[error("best path is not a path of the annotated lattice")]
    BestPathMissing,
    #[error("chosen path is not a path of the annotated lattice")]
    ChosenPathMissing,
    #[error(
        "parallel segment starting at state {state} has {count} paths (limit {limit}); \
         review the intent library or blank quotas"
    )]
    SegmentLimit {
        state: StateId,
        count: u128,
        limit: u128,
    },
    #[error("no candidate paths to select from")]
    NoCandidates,
}

/// Crate-level error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Fst(#[from] FstError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
