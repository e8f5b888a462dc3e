//! Intent libraries and their compilation into the index transducer.

mod entity;
mod library;
mod transducer;

pub use entity::{build_entity_grammar, EntityGrammar};
pub use library::{Intent, IntentExample, IntentLibrary, Token};
pub use transducer::{
    build_index, compile, replace_entities, IndexStats, IndexTransducer, SymbolInfo, SymbolKind,
    ROOT,
};
