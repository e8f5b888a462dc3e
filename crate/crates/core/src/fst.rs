//! Weighted finite-state machines over a shared symbol table and the
//! tropical-weight DAG algorithms the rescoring pipeline needs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::FstError;
use crate::symbols::{Label, EPSILON};
use crate::weight::Weight;

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: Weight,
    pub next: StateId,
}

impl Transition {
    pub fn new(ilabel: Label, olabel: Label, weight: Weight, next: StateId) -> Self {
        Transition {
            ilabel,
            olabel,
            weight,
            next,
        }
    }

    /// Acceptor arc: input and output carry the same label.
    pub fn acceptor(label: Label, weight: Weight, next: StateId) -> Self {
        Transition::new(label, label, weight, next)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub arcs: Vec<Transition>,
    #[serde(rename = "final", default, skip_serializing_if = "Option::is_none")]
    pub final_weight: Option<Weight>,
}

/// Reference to the `index`-th arc leaving `state`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcRef {
    pub state: StateId,
    pub index: usize,
}

/// A start→final (or sub-range) path given as a sequence of arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub arcs: Vec<ArcRef>,
    pub weight: Weight,
}

impl Path {
    pub fn transitions<'a>(&'a self, fst: &'a Fst) -> impl Iterator<Item = &'a Transition> + 'a {
        self.arcs.iter().map(move |a| fst.arc(*a))
    }

    /// Input labels along the path, ε included.
    pub fn input_labels(&self, fst: &Fst) -> Vec<Label> {
        self.transitions(fst).map(|t| t.ilabel).collect()
    }

    /// Input labels with ε removed.
    pub fn words(&self, fst: &Fst) -> Vec<Label> {
        self.transitions(fst)
            .map(|t| t.ilabel)
            .filter(|&l| l != EPSILON)
            .collect()
    }

    pub fn output_labels(&self, fst: &Fst) -> Vec<Label> {
        self.transitions(fst).map(|t| t.olabel).collect()
    }

    /// States visited, starting from `from`.
    pub fn states(&self, fst: &Fst, from: StateId) -> Vec<StateId> {
        let mut out = vec![from];
        out.extend(self.transitions(fst).map(|t| t.next));
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fst {
    states: Vec<State>,
    start: Option<StateId>,
}

impl Fst {
    pub fn new() -> Self {
        Fst::default()
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::default());
        self.states.len() - 1
    }

    pub fn add_states(&mut self, n: usize) {
        self.states.resize_with(self.states.len() + n, State::default);
    }

    pub fn set_start(&mut self, s: StateId) {
        self.start = Some(s);
    }

    pub fn set_final(&mut self, s: StateId, w: Weight) {
        self.states[s].final_weight = Some(w);
    }

    pub fn clear_final(&mut self, s: StateId) {
        self.states[s].final_weight = None;
    }

    pub fn add_arc(&mut self, s: StateId, tr: Transition) -> usize {
        self.states[s].arcs.push(tr);
        self.states[s].arcs.len() - 1
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn arcs(&self, s: StateId) -> &[Transition] {
        &self.states[s].arcs
    }

    pub fn arc(&self, a: ArcRef) -> &Transition {
        &self.states[a.state].arcs[a.index]
    }

    pub fn final_weight(&self, s: StateId) -> Option<Weight> {
        self.states[s].final_weight
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.states[s].final_weight.is_some()
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).filter(move |&s| self.is_final(s))
    }

    pub fn state_ids(&self) -> std::ops::Range<StateId> {
        0..self.states.len()
    }

    /// A single-path acceptor spelling `labels`.
    pub fn linear(labels: &[Label], weights: &[Weight]) -> Fst {
        let mut fst = Fst::new();
        fst.add_states(labels.len() + 1);
        fst.set_start(0);
        for (i, &l) in labels.iter().enumerate() {
            let w = weights.get(i).copied().unwrap_or(Weight::ONE);
            fst.add_arc(i, Transition::acceptor(l, w, i + 1));
        }
        fst.set_final(labels.len(), Weight::ONE);
        fst
    }

    /// Checks that the start state and every arc destination exist.
    pub fn validate(&self) -> Result<StateId, FstError> {
        let start = self.start.ok_or(FstError::NoStart)?;
        if start >= self.states.len() {
            return Err(FstError::InvalidState(start));
        }
        for st in &self.states {
            for tr in &st.arcs {
                if tr.next >= self.states.len() {
                    return Err(FstError::InvalidState(tr.next));
                }
            }
        }
        Ok(start)
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut indeg = vec![0; self.states.len()];
        for st in &self.states {
            for tr in &st.arcs {
                indeg[tr.next] += 1;
            }
        }
        indeg
    }

    /// Topological order of all states (start first among ready states,
    /// then lowest id).
    pub fn topo_order(&self) -> Result<Vec<StateId>, FstError> {
        self.validate()?;
        let start = self.start.unwrap_or(0);
        let mut indeg = self.in_degrees();
        let mut ready: BinaryHeap<Reverse<(bool, StateId)>> = indeg
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(s, _)| Reverse((s != start, s)))
            .collect();
        let mut order = Vec::with_capacity(self.states.len());
        while let Some(Reverse((_, s))) = ready.pop() {
            order.push(s);
            for tr in &self.states[s].arcs {
                indeg[tr.next] -= 1;
                if indeg[tr.next] == 0 {
                    ready.push(Reverse((tr.next != start, tr.next)));
                }
            }
        }
        if order.len() < self.states.len() {
            return Err(FstError::Cycle(self.find_cycle_state(&indeg)));
        }
        Ok(order)
    }

    // Walks arcs among states that kept a positive in-degree; every such
    // state has a predecessor in the set, so walking backwards must repeat.
    fn find_cycle_state(&self, indeg: &[usize]) -> StateId {
        let mut preds: Vec<Option<StateId>> = vec![None; self.states.len()];
        for (s, st) in self.states.iter().enumerate() {
            if indeg[s] == 0 {
                continue;
            }
            for tr in &st.arcs {
                if indeg[tr.next] > 0 && preds[tr.next].is_none() {
                    preds[tr.next] = Some(s);
                }
            }
        }
        let mut seen = vec![false; self.states.len()];
        let mut cur = (0..self.states.len())
            .find(|&s| indeg[s] > 0)
            .expect("cycle implies a remaining state");
        while !seen[cur] {
            seen[cur] = true;
            cur = preds[cur].expect("remaining state has a remaining predecessor");
        }
        cur
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_ok()
    }

    pub fn is_topologically_sorted(&self) -> bool {
        self.states
            .iter()
            .enumerate()
            .all(|(s, st)| st.arcs.iter().all(|tr| tr.next > s))
    }

    /// Returns an error naming the first backward arc, if any.
    pub fn check_sorted(&self) -> Result<(), FstError> {
        for (s, st) in self.states.iter().enumerate() {
            if let Some(tr) = st.arcs.iter().find(|tr| tr.next <= s) {
                return Err(FstError::Unsorted {
                    from: s,
                    to: tr.next,
                });
            }
        }
        Ok(())
    }

    /// Relabels states so that `order[new] = old`. States absent from
    /// `order` are dropped along with their arcs.
    pub fn renumber(&self, order: &[StateId]) -> Fst {
        let mut map = vec![None; self.states.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = Some(new);
        }
        let mut out = Fst::new();
        out.add_states(order.len());
        for (new, &old) in order.iter().enumerate() {
            let st = &self.states[old];
            out.states[new].final_weight = st.final_weight;
            for tr in &st.arcs {
                if let Some(next) = map[tr.next] {
                    out.states[new].arcs.push(Transition { next, ..*tr });
                }
            }
        }
        out.start = self.start.and_then(|s| map[s]);
        out
    }

    /// Copy with state ids in topological order.
    pub fn topo_sort(&self) -> Result<Fst, FstError> {
        let order = self.topo_order()?;
        Ok(self.renumber(&order))
    }

    /// States reachable from the start that can also reach a final state.
    pub fn useful_states(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut access = vec![false; n];
        if let Some(start) = self.start {
            let mut stack = vec![start];
            access[start] = true;
            while let Some(s) = stack.pop() {
                for tr in &self.states[s].arcs {
                    if !access[tr.next] {
                        access[tr.next] = true;
                        stack.push(tr.next);
                    }
                }
            }
        }
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (s, st) in self.states.iter().enumerate() {
            for tr in &st.arcs {
                rev[tr.next].push(s);
            }
        }
        let mut coaccess = vec![false; n];
        let mut stack: Vec<StateId> = self.finals().collect();
        for &f in &stack {
            coaccess[f] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &rev[s] {
                if !coaccess[p] {
                    coaccess[p] = true;
                    stack.push(p);
                }
            }
        }
        access
            .iter()
            .zip(&coaccess)
            .map(|(&a, &c)| a && c)
            .collect()
    }

    /// Removes useless states, keeping the relative order of the rest.
    /// Returns the trimmed machine and the kept old ids (`kept[new] = old`).
    pub fn connect(&self) -> (Fst, Vec<StateId>) {
        let useful = self.useful_states();
        let kept: Vec<StateId> = (0..self.states.len()).filter(|&s| useful[s]).collect();
        let mut out = self.renumber(&kept);
        if out.start.is_none() {
            out = Fst::new();
        }
        (out, kept)
    }

    /// True if no path reaches a final state.
    pub fn is_empty_language(&self) -> bool {
        match self.start {
            None => true,
            Some(s) => !self.useful_states()[s],
        }
    }

    /// Applies `map` to every input and output label.
    pub fn relabel(&mut self, map: &[Label]) {
        for st in &mut self.states {
            for tr in &mut st.arcs {
                tr.ilabel = map[tr.ilabel as usize];
                tr.olabel = map[tr.olabel as usize];
            }
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.states
            .iter()
            .flat_map(|st| st.arcs.iter().flat_map(|tr| [tr.ilabel, tr.olabel]))
    }
}

/// Minimum-cost start→final path. Ties go to the first path in
/// [`enumerate_paths`] order: stopping at a final state beats continuing,
/// then the lowest arc index wins.
pub fn best_path(fst: &Fst) -> Result<Path, FstError> {
    let start = fst.validate()?;
    let order = fst.topo_order()?;
    let suffix = suffix_costs(fst, &order, |s| fst.final_weight(s));
    if !suffix[start].is_finite() {
        return Err(FstError::Empty);
    }
    let mut arcs = Vec::new();
    let mut weight = Weight::ONE;
    let mut s = start;
    loop {
        let target = suffix[s];
        if fst.final_weight(s) == Some(target) {
            weight = weight.times(target);
            break;
        }
        let (index, tr) = fst
            .arcs(s)
            .iter()
            .enumerate()
            .find(|(_, tr)| tr.weight.times(suffix[tr.next]) == target)
            .expect("suffix cost is realised by some arc");
        arcs.push(ArcRef { state: s, index });
        weight = weight.times(tr.weight);
        s = tr.next;
    }
    Ok(Path { arcs, weight })
}

// Cost of the cheapest continuation from every state.
fn suffix_costs(fst: &Fst, order: &[StateId], end: impl Fn(StateId) -> Option<Weight>) -> Vec<Weight> {
    let mut suffix = vec![Weight::ZERO; fst.num_states()];
    for &s in order.iter().rev() {
        let mut best = end(s).unwrap_or(Weight::ZERO);
        for tr in fst.arcs(s) {
            best = best.plus(tr.weight.times(suffix[tr.next]));
        }
        suffix[s] = best;
    }
    suffix
}

/// All start→final paths in depth-first order. Fails once more than
/// `limit` paths have been produced.
pub fn enumerate_paths(fst: &Fst, limit: usize) -> Result<Vec<Path>, FstError> {
    let start = fst.validate()?;
    fst.topo_order()?;
    enumerate_from(fst, start, limit, |s| fst.final_weight(s), |_| false)
}

/// All paths from `from` to `to`, not continuing past `to`. The weight of
/// each path is the sum of its arc weights.
pub fn enumerate_between(
    fst: &Fst,
    from: StateId,
    to: StateId,
    limit: usize,
) -> Result<Vec<Path>, FstError> {
    enumerate_from(
        fst,
        from,
        limit,
        |s| (s == to).then_some(Weight::ONE),
        |s| s == to,
    )
}

fn enumerate_from(
    fst: &Fst,
    from: StateId,
    limit: usize,
    end: impl Fn(StateId) -> Option<Weight>,
    stop: impl Fn(StateId) -> bool,
) -> Result<Vec<Path>, FstError> {
    let mut out = Vec::new();
    let mut arcs: Vec<ArcRef> = Vec::new();
    // weights[i] = cost of the first i arcs
    let mut weights = vec![Weight::ONE];
    // (state, next arc index to try)
    let mut stack: Vec<(StateId, usize)> = Vec::new();

    let enter = |s: StateId, arcs: &Vec<ArcRef>, w: Weight, out: &mut Vec<Path>| {
        if let Some(fw) = end(s) {
            if out.len() == limit {
                return Err(FstError::LimitExceeded { reached: limit + 1 });
            }
            out.push(Path {
                arcs: arcs.clone(),
                weight: w.times(fw),
            });
        }
        Ok(())
    };

    enter(from, &arcs, Weight::ONE, &mut out)?;
    if !stop(from) {
        stack.push((from, 0));
    }
    while let Some(top) = stack.last_mut() {
        let (s, idx) = *top;
        if idx >= fst.arcs(s).len() {
            stack.pop();
            if !stack.is_empty() {
                arcs.pop();
                weights.pop();
            }
            continue;
        }
        top.1 += 1;
        let tr = fst.arcs(s)[idx];
        arcs.push(ArcRef { state: s, index: idx });
        let w = weights.last().unwrap().times(tr.weight);
        weights.push(w);
        enter(tr.next, &arcs, w, &mut out)?;
        if stop(tr.next) {
            arcs.pop();
            weights.pop();
        } else {
            stack.push((tr.next, 0));
        }
    }
    Ok(out)
}

/// Number of distinct start→final paths, by dynamic programming over a
/// topological order. Saturates at `u128::MAX`.
pub fn count_paths(fst: &Fst) -> Result<u128, FstError> {
    let start = fst.validate()?;
    let order = fst.topo_order()?;
    let counts = path_counts(fst, &order, |s| fst.is_final(s), |_| false);
    Ok(counts[start])
}

/// Number of paths from `from` to `to` that do not continue past `to`.
pub fn count_between(fst: &Fst, from: StateId, to: StateId) -> Result<u128, FstError> {
    let order = fst.topo_order()?;
    let counts = path_counts(fst, &order, |s| s == to, |s| s == to);
    Ok(counts[from])
}

fn path_counts(
    fst: &Fst,
    order: &[StateId],
    end: impl Fn(StateId) -> bool,
    stop: impl Fn(StateId) -> bool,
) -> Vec<u128> {
    let mut counts = vec![0u128; fst.num_states()];
    for &s in order.iter().rev() {
        let mut c: u128 = u128::from(end(s));
        if !stop(s) {
            for tr in fst.arcs(s) {
                c = c.saturating_add(counts[tr.next]);
            }
        }
        counts[s] = c;
    }
    counts
}
