use crate::error::FstError;
use crate::fst::{Fst, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Series,
    Parallel,
}

/// Inclusive state range `[first, last]` of a topologically sorted fst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub kind: SegmentKind,
    pub first: StateId,
    pub last: StateId,
}

impl Segment {
    pub fn contains(&self, s: StateId) -> bool {
        self.first <= s && s <= self.last
    }
}

/// Running sum of `outdeg - indeg` over states in id order, starting at
/// -1. Final weights count as an arc into a virtual sink, so the value after
/// state `s` is the number of arcs crossing from `≤ s` to `> s`, minus one.
pub fn degree_sums(fst: &Fst) -> Result<Vec<i64>, FstError> {
    fst.check_sorted()?;
    let indeg = fst.in_degrees();
    let mut sum = -1i64;
    let mut out = Vec::with_capacity(fst.num_states());
    for s in fst.state_ids() {
        let outdeg = fst.arcs(s).len() + usize::from(fst.is_final(s));
        sum += outdeg as i64 - indeg[s] as i64;
        out.push(sum);
    }
    Ok(out)
}

/// Splits a sorted fst into series and parallel segments.
///
/// A parallel segment is a maximal run of states with positive degree sum
/// together with the following state, where the sum returns to zero (the
/// merge point). Consecutive remaining states form series segments.
pub fn segment(fst: &Fst) -> Result<Vec<Segment>, FstError> {
    let sums = degree_sums(fst)?;
    let mut segments: Vec<Segment> = Vec::new();
    let mut s = 0;
    let n = sums.len();
    while s < n {
        if sums[s] > 0 {
            let first = s;
            while s < n && sums[s] > 0 {
                s += 1;
            }
            let last = s.min(n - 1);
            segments.push(Segment {
                kind: SegmentKind::Parallel,
                first,
                last,
            });
            s = last + 1;
        } else {
            match segments.last_mut() {
                Some(seg) if seg.kind == SegmentKind::Series && seg.last + 1 == s => seg.last = s,
                _ => segments.push(Segment {
                    kind: SegmentKind::Series,
                    first: s,
                    last: s,
                }),
            }
            s += 1;
        }
    }
    Ok(segments)
}
