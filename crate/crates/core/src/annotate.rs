//! Lattice annotation: composition with the intent index, blank-quota
//! pruning and pruning of unannotated alternatives.

use crate::bestpath::{segment, SegmentKind};
use crate::compose::{compose_sigma, PairState};
use crate::error::{AnnotateError, FstError};
use crate::fst::{ArcRef, Fst, Path, StateId, Transition};
use crate::index::{IndexTransducer, SymbolInfo, SymbolKind};
use crate::symbols::{Label, SymbolTable, EPSILON};
use crate::weight::Weight;

/// A lattice composed with the index. States and arcs remember where they
/// came from: `state_origin` is `None` only for the added super-final
/// state, `arc_origin` is `None` for arcs that consumed no lattice arc.
///
/// The fst is topologically sorted, trimmed and has a single final state
/// without outgoing arcs.
#[derive(Debug, Clone)]
pub struct AnnotatedLattice<'a> {
    pub index: &'a IndexTransducer,
    pub symbols: SymbolTable,
    pub lattice: Fst,
    pub fst: Fst,
    pub state_origin: Vec<Option<PairState>>,
    pub arc_origin: Vec<Vec<Option<ArcRef>>>,
}

impl<'a> AnnotatedLattice<'a> {
    pub fn final_state(&self) -> Option<StateId> {
        self.fst.finals().next()
    }

    pub fn origin(&self, a: ArcRef) -> Option<ArcRef> {
        self.arc_origin[a.state][a.index]
    }

    /// Annotation role of an output label, if any.
    pub fn symbol_info(&self, label: Label) -> Option<SymbolInfo> {
        self.index.symbol_info(label)
    }

    /// The path of this lattice that spells `lattice_path` without any
    /// annotation output.
    pub fn find_plain_path(&self, lattice_path: &[ArcRef]) -> Option<Path> {
        let mut s = self.fst.start()?;
        let mut arcs = Vec::with_capacity(lattice_path.len() + 1);
        let mut weight = Weight::ONE;
        for &want in lattice_path {
            let (i, tr) = self
                .fst
                .arcs(s)
                .iter()
                .enumerate()
                .find(|(i, tr)| tr.olabel == EPSILON && self.arc_origin[s][*i] == Some(want))?;
            arcs.push(ArcRef { state: s, index: i });
            weight = weight.times(tr.weight);
            s = tr.next;
        }
        while !self.fst.is_final(s) {
            let (i, tr) = self
                .fst
                .arcs(s)
                .iter()
                .enumerate()
                .find(|(i, tr)| tr.olabel == EPSILON && self.arc_origin[s][*i].is_none())?;
            arcs.push(ArcRef { state: s, index: i });
            weight = weight.times(tr.weight);
            s = tr.next;
        }
        Some(Path {
            arcs,
            weight: weight.times(self.fst.final_weight(s)?),
        })
    }

    /// Lattice arcs consumed by a path of this lattice.
    pub fn lattice_arcs(&self, path: &Path) -> Vec<ArcRef> {
        path.arcs.iter().filter_map(|&a| self.origin(a)).collect()
    }
}

/// Extends the index symbol table with the lattice vocabulary and relabels
/// the lattice accordingly.
pub fn merge_symbols(
    lattice: &Fst,
    lattice_symbols: &SymbolTable,
    index: &IndexTransducer,
) -> (Fst, SymbolTable) {
    let mut symbols = index.symbols.clone();
    let map = symbols.merge(lattice_symbols);
    let mut relabeled = lattice.clone();
    relabeled.relabel(&map);
    (relabeled, symbols)
}

fn check_extends(symbols: &SymbolTable, index: &IndexTransducer) -> Result<(), FstError> {
    for (id, token) in index.symbols.iter() {
        if symbols.token(id) != Some(token) {
            return Err(FstError::UnknownLabel(id));
        }
    }
    Ok(())
}

/// Composes `lattice` with the index. `symbols` must extend the index's
/// table (see [`merge_symbols`]). The result may still violate quotas.
pub fn annotate<'a>(
    lattice: &Fst,
    symbols: &SymbolTable,
    index: &'a IndexTransducer,
) -> Result<AnnotatedLattice<'a>, AnnotateError> {
    check_extends(symbols, index)?;
    let comp = compose_sigma(lattice, &index.fst, symbols)?;
    let mut fst = comp.fst;
    let mut state_origin: Vec<Option<PairState>> = comp.state_origin.into_iter().map(Some).collect();
    let mut arc_origin = comp.arc_origin;

    let finals: Vec<StateId> = fst.finals().collect();
    let single = finals.len() == 1 && fst.arcs(finals[0]).is_empty();
    if !finals.is_empty() && !single {
        let sink = fst.add_state();
        state_origin.push(None);
        arc_origin.push(Vec::new());
        for f in finals {
            let w = fst.final_weight(f).expect("final");
            fst.clear_final(f);
            fst.add_arc(f, Transition::new(EPSILON, EPSILON, w, sink));
            arc_origin[f].push(None);
        }
        fst.set_final(sink, Weight::ONE);
    }
    Ok(AnnotatedLattice {
        index,
        symbols: symbols.clone(),
        lattice: lattice.clone(),
        fst,
        state_origin,
        arc_origin,
    })
}

// Matching context: the example being matched and blanks used so far.
type Context = Option<(usize, usize)>;

fn structure_error(state: StateId, arc: usize, reason: impl Into<String>) -> AnnotateError {
    AnnotateError::Structure {
        state,
        arc,
        reason: reason.into(),
    }
}

// Context after taking `tr` in context `ctx`; `Ok(None)` prunes the arc.
fn step(
    annotated: &AnnotatedLattice,
    state: StateId,
    arc: usize,
    tr: &Transition,
    ctx: Context,
) -> Result<Option<Context>, AnnotateError> {
    if tr.olabel == EPSILON {
        return Ok(match ctx {
            None => Some(None),
            Some((e, blanks)) => {
                let blanks = blanks + usize::from(tr.ilabel != EPSILON);
                (blanks <= annotated.index.quota(e)).then_some(Some((e, blanks)))
            }
        });
    }
    let info = annotated.symbol_info(tr.olabel).ok_or_else(|| {
        structure_error(state, arc, format!("output label {} is not an annotation symbol", tr.olabel))
    })?;
    let same = |e: usize| matches!(ctx, Some((cur, _)) if cur == e);
    match info.kind {
        SymbolKind::Begin if ctx.is_none() => Ok(Some(Some((info.example, 0)))),
        SymbolKind::Begin => Err(structure_error(state, arc, "begin symbol inside an open annotation")),
        SymbolKind::Continue | SymbolKind::Entity { .. } if same(info.example) => Ok(Some(ctx)),
        SymbolKind::Continue | SymbolKind::Entity { .. } => Err(structure_error(
            state,
            arc,
            "continuation symbol outside its annotation",
        )),
        SymbolKind::End if same(info.example) => Ok(Some(None)),
        SymbolKind::End => Err(structure_error(state, arc, "end symbol outside its annotation")),
        SymbolKind::Placeholder { .. } => Err(structure_error(state, arc, "unexpanded entity placeholder")),
    }
}

/// Removes every path on which some annotation uses more blanks than its
/// example's quota.
///
/// States are split by matching context (open example and blanks used), so
/// a state reached with different blank counts keeps each count apart and
/// no valid path is lost. One forward sweep in topological order discovers
/// the reachable (state, context) nodes; a backward sweep keeps the nodes
/// that reach the final state. The result is trimmed and sorted.
pub fn prune_quota<'a>(raw: &AnnotatedLattice<'a>) -> Result<AnnotatedLattice<'a>, AnnotateError> {
    let fst = &raw.fst;
    fst.check_sorted()?;
    let Some(start) = fst.start() else {
        return Ok(raw.clone());
    };

    let n = fst.num_states();
    // per state: contexts seen, as node ids
    let mut at: Vec<Vec<(Context, usize)>> = vec![Vec::new(); n];
    let mut nodes: Vec<(StateId, Context)> = Vec::new();
    let mut succ: Vec<Vec<(usize, usize)>> = Vec::new();
    at[start].push((None, 0));
    nodes.push((start, None));
    succ.push(Vec::new());

    for s in start..n {
        for k in 0..at[s].len() {
            let (ctx, node) = at[s][k];
            if fst.is_final(s) && ctx.is_some() {
                return Err(AnnotateError::OpenAnnotation(s));
            }
            for (i, tr) in fst.arcs(s).iter().enumerate() {
                let Some(next_ctx) = step(raw, s, i, tr, ctx)? else {
                    continue;
                };
                let child = match at[tr.next].iter().find(|(c, _)| *c == next_ctx) {
                    Some(&(_, id)) => id,
                    None => {
                        let id = nodes.len();
                        nodes.push((tr.next, next_ctx));
                        succ.push(Vec::new());
                        at[tr.next].push((next_ctx, id));
                        id
                    }
                };
                succ[node].push((i, child));
            }
        }
    }

    let mut alive = vec![false; nodes.len()];
    for s in (start..n).rev() {
        for &(ctx, node) in &at[s] {
            alive[node] = (fst.is_final(s) && ctx.is_none()) || succ[node].iter().any(|&(_, c)| alive[c]);
        }
    }

    let order: Vec<usize> = (start..n)
        .flat_map(|s| at[s].iter().map(|&(_, id)| id))
        .filter(|&id| alive[id])
        .collect();
    let mut new_id = vec![usize::MAX; nodes.len()];
    for (k, &id) in order.iter().enumerate() {
        new_id[id] = k;
    }

    let mut out = Fst::new();
    out.add_states(order.len());
    let mut state_origin = Vec::with_capacity(order.len());
    let mut arc_origin = Vec::with_capacity(order.len());
    for (k, &id) in order.iter().enumerate() {
        let (s, _) = nodes[id];
        state_origin.push(raw.state_origin[s]);
        let mut origins = Vec::new();
        for &(i, child) in &succ[id] {
            if alive[child] {
                out.add_arc(k, Transition { next: new_id[child], ..fst.arcs(s)[i] });
                origins.push(raw.arc_origin[s][i]);
            }
        }
        arc_origin.push(origins);
        if let Some(w) = fst.final_weight(s) {
            out.set_final(k, w);
        }
    }
    if !order.is_empty() {
        out.set_start(0);
    }
    Ok(AnnotatedLattice {
        index: raw.index,
        symbols: raw.symbols.clone(),
        lattice: raw.lattice.clone(),
        fst: out,
        state_origin,
        arc_origin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Track {
    /// Still following the best path.
    Best,
    /// Left the best path, no annotation seen yet.
    Off,
    /// Carries an annotation in the current segment.
    Annotated,
}

/// Drops unannotated alternatives: inside every parallel segment only the
/// best-path hypothesis and sub-paths carrying at least one annotation
/// survive. `original_best` is a path of the source lattice.
pub fn prune_alternatives<'a>(
    pruned: &AnnotatedLattice<'a>,
    original_best: &Path,
) -> Result<AnnotatedLattice<'a>, AnnotateError> {
    let fst = &pruned.fst;
    let best = pruned
        .find_plain_path(&original_best.arcs)
        .ok_or(AnnotateError::BestPathMissing)?;
    let segments = segment(fst)?;
    let n = fst.num_states();
    let mut on_best = vec![Vec::new(); n];
    for a in &best.arcs {
        on_best[a.state].push(a.index);
    }
    // last state of the parallel segment holding each state, if any
    let mut closes = vec![None; n];
    for seg in &segments {
        if seg.kind == SegmentKind::Parallel {
            closes[seg.first..=seg.last].fill(Some(seg.last));
        }
    }

    let start = fst.start().expect("best path exists");
    let mut at: Vec<Vec<(Track, usize)>> = vec![Vec::new(); n];
    let mut nodes: Vec<StateId> = vec![start];
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    at[start].push((Track::Best, 0));

    for s in start..n {
        for k in 0..at[s].len() {
            let (track, node) = at[s][k];
            for (i, tr) in fst.arcs(s).iter().enumerate() {
                let inside = closes[s].is_some() && closes[s] != Some(s);
                let next_track = if !inside {
                    Track::Best
                } else {
                    let annotated = tr.olabel != EPSILON;
                    match track {
                        Track::Annotated => Track::Annotated,
                        _ if annotated => Track::Annotated,
                        Track::Best if on_best[s].contains(&i) => Track::Best,
                        _ => Track::Off,
                    }
                };
                let next_track = if closes[tr.next] == Some(tr.next) && inside {
                    if next_track == Track::Off {
                        continue;
                    }
                    Track::Best
                } else {
                    next_track
                };
                let child = match at[tr.next].iter().find(|(t, _)| *t == next_track) {
                    Some(&(_, id)) => id,
                    None => {
                        let id = nodes.len();
                        nodes.push(tr.next);
                        succ.push(Vec::new());
                        at[tr.next].push((next_track, id));
                        id
                    }
                };
                succ[node].push((i, child));
            }
        }
    }

    let mut alive = vec![false; nodes.len()];
    for s in (start..n).rev() {
        for &(_, node) in &at[s] {
            alive[node] = fst.is_final(s) || succ[node].iter().any(|&(_, c)| alive[c]);
        }
    }
    let order: Vec<usize> = (start..n)
        .flat_map(|s| at[s].iter().map(|&(_, id)| id))
        .filter(|&id| alive[id])
        .collect();
    let mut new_id = vec![usize::MAX; nodes.len()];
    for (k, &id) in order.iter().enumerate() {
        new_id[id] = k;
    }
    let mut out = Fst::new();
    out.add_states(order.len());
    out.set_start(0);
    let mut state_origin = Vec::with_capacity(order.len());
    let mut arc_origin = Vec::with_capacity(order.len());
    for (k, &id) in order.iter().enumerate() {
        let s = nodes[id];
        state_origin.push(pruned.state_origin[s]);
        let mut origins = Vec::new();
        for &(i, child) in &succ[id] {
            if alive[child] {
                out.add_arc(k, Transition { next: new_id[child], ..fst.arcs(s)[i] });
                origins.push(pruned.arc_origin[s][i]);
            }
        }
        arc_origin.push(origins);
        if let Some(w) = fst.final_weight(s) {
            out.set_final(k, w);
        }
    }
    Ok(AnnotatedLattice {
        index: pruned.index,
        symbols: pruned.symbols.clone(),
        lattice: pruned.lattice.clone(),
        fst: out,
        state_origin,
        arc_origin,
    })
}
