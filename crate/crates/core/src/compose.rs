//! Composition of an acyclic lattice acceptor with an index transducer whose
//! input side may carry σ (match any single non-ε word).

use std::collections::{HashMap, VecDeque};

use crate::error::FstError;
use crate::fst::{ArcRef, Fst, StateId, Transition};
use crate::symbols::{Label, SymbolTable, EPSILON, SIGMA};

/// Where a composed state came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairState {
    pub lattice: StateId,
    pub index: StateId,
}

/// Composition result. `arc_origin` runs parallel to the arcs of `fst` and
/// names the lattice arc each composed arc consumed (`None` for moves of the
/// index alone).
#[derive(Debug, Clone)]
pub struct Composition {
    pub fst: Fst,
    pub state_origin: Vec<PairState>,
    pub arc_origin: Vec<Vec<Option<ArcRef>>>,
}

impl Composition {
    /// Keeps only useful states, then renumbers topologically, carrying the
    /// side tables along.
    pub fn finish(self) -> Result<Composition, FstError> {
        let (trimmed, kept) = self.fst.connect();
        let state_origin: Vec<PairState> = kept.iter().map(|&s| self.state_origin[s]).collect();
        let arc_origin = remap_arc_origins(&self.fst, &self.arc_origin, &kept, &trimmed);
        if trimmed.start().is_none() {
            return Ok(Composition {
                fst: trimmed,
                state_origin,
                arc_origin,
            });
        }
        let order = trimmed.topo_order()?;
        Ok(Composition {
            fst: trimmed.renumber(&order),
            state_origin: order.iter().map(|&s| state_origin[s]).collect(),
            arc_origin: order.iter().map(|&s| arc_origin[s].clone()).collect(),
        })
    }
}

// `renumber` keeps arcs whose target survives, in order; mirror that.
pub(crate) fn remap_arc_origins<T: Clone>(
    old: &Fst,
    origins: &[Vec<T>],
    kept: &[StateId],
    new: &Fst,
) -> Vec<Vec<T>> {
    let mut alive = vec![false; old.num_states()];
    for &s in kept {
        alive[s] = true;
    }
    let out: Vec<Vec<T>> = kept
        .iter()
        .map(|&s| {
            old.arcs(s)
                .iter()
                .zip(&origins[s])
                .filter(|(tr, _)| alive[tr.next])
                .map(|(_, o)| o.clone())
                .collect()
        })
        .collect();
    debug_assert!(out
        .iter()
        .enumerate()
        .all(|(s, o)| o.len() == new.arcs(s).len()));
    out
}

// Per index state: label → arc indices, σ arcs, ε-input arcs.
struct IndexMatcher {
    by_label: Vec<HashMap<Label, Vec<usize>>>,
    sigma: Vec<Vec<usize>>,
    epsilon: Vec<Vec<usize>>,
}

impl IndexMatcher {
    fn new(index: &Fst) -> Self {
        let n = index.num_states();
        let mut by_label = vec![HashMap::new(); n];
        let mut sigma = vec![Vec::new(); n];
        let mut epsilon = vec![Vec::new(); n];
        for s in 0..n {
            for (i, tr) in index.arcs(s).iter().enumerate() {
                match tr.ilabel {
                    EPSILON => epsilon[s].push(i),
                    SIGMA => sigma[s].push(i),
                    l => by_label[s].entry(l).or_insert_with(Vec::new).push(i),
                }
            }
        }
        IndexMatcher {
            by_label,
            sigma,
            epsilon,
        }
    }

    // Arcs at `s` accepting word `w`, in stored order.
    fn matching(&self, s: StateId, w: Label) -> Vec<usize> {
        let mut out: Vec<usize> = self.by_label[s].get(&w).cloned().unwrap_or_default();
        out.extend_from_slice(&self.sigma[s]);
        out.sort_unstable();
        out
    }
}

/// Checks that every label of `fst` belongs to `symbols`.
pub fn check_labels(fst: &Fst, symbols: &SymbolTable) -> Result<(), FstError> {
    match fst.labels().find(|&l| !symbols.contains_label(l)) {
        Some(l) => Err(FstError::UnknownLabel(l)),
        None => Ok(()),
    }
}

/// Checks the lattice side of a composition: an acyclic acceptor free of σ.
pub fn check_lattice(lattice: &Fst) -> Result<(), FstError> {
    lattice.topo_order()?;
    for s in lattice.state_ids() {
        for tr in lattice.arcs(s) {
            if tr.ilabel != tr.olabel {
                return Err(FstError::NotAcceptor(s));
            }
            if tr.ilabel == SIGMA {
                return Err(FstError::SigmaInLattice(s));
            }
        }
    }
    Ok(())
}

/// Composes `lattice ∘ index`.
///
/// A σ input arc of the index consumes any single non-ε lattice word. ε arcs
/// of the lattice advance the lattice alone; ε-input arcs of the index
/// advance the index alone. A sequencing filter forbids an index-only move
/// directly after a lattice-only move, so each label sequence is produced by
/// one interleaving only. The result is trimmed and topologically sorted.
pub fn compose_sigma(
    lattice: &Fst,
    index: &Fst,
    symbols: &SymbolTable,
) -> Result<Composition, FstError> {
    check_labels(lattice, symbols)?;
    check_labels(index, symbols)?;
    check_lattice(lattice)?;
    let lstart = lattice.validate()?;
    let istart = index.validate()?;
    let matcher = IndexMatcher::new(index);

    let mut fst = Fst::new();
    let mut state_origin = Vec::new();
    let mut arc_origin: Vec<Vec<Option<ArcRef>>> = Vec::new();
    // (lattice, index, filter) → composed id; filter 1 = after a lattice-only move
    let mut ids: HashMap<(StateId, StateId, u8), StateId> = HashMap::new();
    let mut queue = VecDeque::new();

    let mut lookup = |key: (StateId, StateId, u8),
                      fst: &mut Fst,
                      state_origin: &mut Vec<PairState>,
                      arc_origin: &mut Vec<Vec<Option<ArcRef>>>,
                      queue: &mut VecDeque<(StateId, StateId, u8)>| {
        *ids.entry(key).or_insert_with(|| {
            let id = fst.add_state();
            state_origin.push(PairState {
                lattice: key.0,
                index: key.1,
            });
            arc_origin.push(Vec::new());
            queue.push_back(key);
            id
        })
    };

    let start = lookup(
        (lstart, istart, 0),
        &mut fst,
        &mut state_origin,
        &mut arc_origin,
        &mut queue,
    );
    fst.set_start(start);

    while let Some(key @ (l, i, filter)) = queue.pop_front() {
        let src = lookup(key, &mut fst, &mut state_origin, &mut arc_origin, &mut queue);
        if let (Some(lw), Some(iw)) = (lattice.final_weight(l), index.final_weight(i)) {
            fst.set_final(src, lw.times(iw));
        }
        for (ai, ltr) in lattice.arcs(l).iter().enumerate() {
            let origin = Some(ArcRef { state: l, index: ai });
            if ltr.ilabel == EPSILON {
                let dst = lookup(
                    (ltr.next, i, 1),
                    &mut fst,
                    &mut state_origin,
                    &mut arc_origin,
                    &mut queue,
                );
                fst.add_arc(src, Transition::new(EPSILON, EPSILON, ltr.weight, dst));
                arc_origin[src].push(origin);
                continue;
            }
            for ii in matcher.matching(i, ltr.ilabel) {
                let itr = index.arcs(i)[ii];
                let dst = lookup(
                    (ltr.next, itr.next, 0),
                    &mut fst,
                    &mut state_origin,
                    &mut arc_origin,
                    &mut queue,
                );
                fst.add_arc(
                    src,
                    Transition::new(ltr.ilabel, itr.olabel, ltr.weight.times(itr.weight), dst),
                );
                arc_origin[src].push(origin);
            }
        }
        if filter == 0 {
            for &ii in &matcher.epsilon[i] {
                let itr = index.arcs(i)[ii];
                let dst = lookup(
                    (l, itr.next, 0),
                    &mut fst,
                    &mut state_origin,
                    &mut arc_origin,
                    &mut queue,
                );
                fst.add_arc(src, Transition::new(EPSILON, itr.olabel, itr.weight, dst));
                arc_origin[src].push(None);
            }
        }
    }

    Composition {
        fst,
        state_origin,
        arc_origin,
    }
    .finish()
}
