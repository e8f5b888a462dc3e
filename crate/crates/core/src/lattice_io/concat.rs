use crate::error::FstError;
use crate::fst::{Fst, StateId, Transition};
use crate::symbols::EPSILON;
use crate::weight::Weight;

/// State range `[start, end]` occupied by one turn in the conversation
/// lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnBoundary {
    pub turn: usize,
    pub start: StateId,
    pub end: StateId,
}

/// All turns of one speaker joined into a single acyclic lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversationLattice {
    pub fst: Fst,
    pub boundaries: Vec<TurnBoundary>,
    pub speaker: String,
}

impl ConversationLattice {
    /// Turn that owns `state`.
    pub fn turn_of(&self, state: StateId) -> Option<usize> {
        self.boundaries
            .iter()
            .find(|b| b.start <= state && state <= b.end)
            .map(|b| b.turn)
    }
}

/// Joins turn lattices in order. Every final state of turn `i` gets a
/// zero-cost ε arc to the start of turn `i + 1` and loses its final weight;
/// only the last turn's final states stay final.
pub fn concat_lattices(turns: &[Fst], speaker: &str) -> Result<ConversationLattice, FstError> {
    if turns.is_empty() {
        return Err(FstError::Empty);
    }
    let mut sorted = Vec::with_capacity(turns.len());
    for turn in turns {
        turn.validate()?;
        let (trimmed, _) = turn.connect();
        if trimmed.start().is_none() {
            return Err(FstError::Empty);
        }
        sorted.push(trimmed.topo_sort()?);
    }

    let mut fst = Fst::new();
    let mut boundaries = Vec::with_capacity(sorted.len());
    let mut prev_finals: Vec<StateId> = Vec::new();
    for (turn, lat) in sorted.iter().enumerate() {
        let offset = fst.num_states();
        fst.add_states(lat.num_states());
        let start = offset + lat.start().expect("trimmed turn has a start");
        if turn == 0 {
            fst.set_start(start);
        }
        for &f in &prev_finals {
            fst.clear_final(f);
            fst.add_arc(f, Transition::acceptor(EPSILON, Weight::ONE, start));
        }
        prev_finals.clear();
        for s in lat.state_ids() {
            for tr in lat.arcs(s) {
                fst.add_arc(
                    offset + s,
                    Transition {
                        next: offset + tr.next,
                        ..*tr
                    },
                );
            }
            if let Some(w) = lat.final_weight(s) {
                fst.set_final(offset + s, w);
                prev_finals.push(offset + s);
            }
        }
        boundaries.push(TurnBoundary {
            turn,
            start: offset,
            end: offset + lat.num_states() - 1,
        });
    }
    Ok(ConversationLattice {
        fst,
        boundaries,
        speaker: speaker.to_string(),
    })
}
