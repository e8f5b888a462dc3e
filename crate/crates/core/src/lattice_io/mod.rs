//! Reading and writing lattices: word confusion networks, the text FST
//! format, and conversation-level concatenation of turn lattices.

mod concat;
mod text;
mod wcn;

pub use concat::{concat_lattices, ConversationLattice, TurnBoundary};
pub use text::{parse_fst, serialize_fst};
pub use wcn::{parse_wcn, parse_wcn_document, wcn_to_fst, Wcn, WcnOptions, POSTERIOR_TOLERANCE};
