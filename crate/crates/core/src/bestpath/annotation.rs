use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::annotate::AnnotatedLattice;
use crate::fst::{ArcRef, Path, StateId, Transition};
use crate::index::{SymbolInfo, SymbolKind, Token};
use crate::symbols::EPSILON;

/// Words that filled one entity placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityFill {
    pub name: String,
    /// Token position of the placeholder in its example.
    pub position: usize,
    pub tokens: Vec<String>,
}

/// One intent match on a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Annotation {
    /// First and last matched word, inclusive, as transcript word indices.
    pub start: usize,
    pub end: usize,
    pub intent_id: String,
    pub example_id: String,
    /// Example index in the compiled index.
    pub example: usize,
    /// Matched example words, entity words included, blanks excluded.
    pub words: Vec<String>,
    pub blanks: usize,
    pub entities: Vec<EntityFill>,
    pub rescored: bool,
}

impl Annotation {
    /// Number of matched example words.
    pub fn intent_words(&self) -> usize {
        self.words.len()
    }

    /// Span length including blanks.
    pub fn span(&self) -> usize {
        self.end - self.start + 1
    }

    /// Identity used to deduplicate matches found along different paths.
    pub fn key(&self) -> (usize, usize, usize, usize, &[EntityFill]) {
        (self.example, self.start, self.end, self.blanks, &self.entities)
    }
}

/// Incrementally assembles one annotation from the arcs of a region.
#[derive(Debug, Clone)]
pub(crate) struct RegionBuilder {
    example: usize,
    start: usize,
    end: usize,
    words: Vec<String>,
    blanks: usize,
    fills: BTreeMap<usize, Vec<String>>,
}

pub(crate) enum Feed {
    Open,
    Done(Annotation),
}

impl RegionBuilder {
    /// Starts a region at a begin arc consuming the word at `pos`.
    pub(crate) fn begin(annotated: &AnnotatedLattice, info: SymbolInfo, tr: &Transition, pos: usize) -> Self {
        let word = annotated.symbols.resolve(tr.ilabel).to_string();
        let mut fills = BTreeMap::new();
        if annotated.index.example(info.example).tokens[0].is_entity() {
            fills.insert(0, vec![word.clone()]);
        }
        RegionBuilder {
            example: info.example,
            start: pos,
            end: pos,
            words: vec![word],
            blanks: 0,
            fills,
        }
    }

    /// Consumes the next arc of the region; `pos` is the index the arc's
    /// word would take.
    pub(crate) fn feed(&mut self, annotated: &AnnotatedLattice, tr: &Transition, pos: usize) -> Feed {
        if tr.olabel == EPSILON {
            if tr.ilabel != EPSILON {
                self.blanks += 1;
            }
            return Feed::Open;
        }
        let info = annotated.symbol_info(tr.olabel).expect("validated by quota pruning");
        match info.kind {
            SymbolKind::End => Feed::Done(self.finish(annotated)),
            SymbolKind::Entity { position } => {
                let word = annotated.symbols.resolve(tr.ilabel).to_string();
                self.fills.entry(position).or_default().push(word.clone());
                self.words.push(word);
                self.end = pos;
                Feed::Open
            }
            _ => {
                self.words.push(annotated.symbols.resolve(tr.ilabel).to_string());
                self.end = pos;
                Feed::Open
            }
        }
    }

    fn finish(&self, annotated: &AnnotatedLattice) -> Annotation {
        let ex = annotated.index.example(self.example);
        let entities = self
            .fills
            .iter()
            .map(|(&position, tokens)| EntityFill {
                name: match &ex.tokens[position] {
                    Token::Entity(name) => name.clone(),
                    Token::Word(w) => w.clone(),
                },
                position,
                tokens: tokens.clone(),
            })
            .collect();
        Annotation {
            start: self.start,
            end: self.end,
            intent_id: ex.intent_id.clone(),
            example_id: ex.example_id.clone(),
            example: self.example,
            words: self.words.clone(),
            blanks: self.blanks,
            entities,
            rescored: false,
        }
    }
}

fn begin_info(annotated: &AnnotatedLattice, tr: &Transition) -> Option<SymbolInfo> {
    annotated
        .symbol_info(tr.olabel)
        .filter(|i| i.kind == SymbolKind::Begin)
}

/// Annotations along one path (or sub-path) of an annotated lattice, with
/// word positions counted from the start of the path.
pub fn path_annotations(annotated: &AnnotatedLattice, path: &Path) -> Vec<Annotation> {
    let mut out = Vec::new();
    let mut pos = 0;
    let mut open: Option<RegionBuilder> = None;
    for tr in path.transitions(&annotated.fst) {
        match open.as_mut() {
            Some(region) => {
                if let Feed::Done(a) = region.feed(annotated, tr, pos) {
                    out.push(a);
                    open = None;
                }
            }
            None => {
                if let Some(info) = begin_info(annotated, tr) {
                    open = Some(RegionBuilder::begin(annotated, info, tr, pos));
                }
            }
        }
        if tr.ilabel != EPSILON {
            pos += 1;
        }
    }
    out
}

/// Every annotation carried by any path of `annotated` whose lattice
/// projection is `lattice_path`, positioned on that path's words, each
/// with the state where its begin arc leaves. Duplicates (same example,
/// span, blanks and fills) are reported once.
pub fn annotations_on_lattice_path(
    annotated: &AnnotatedLattice,
    lattice_path: &[ArcRef],
) -> Vec<(Annotation, StateId)> {
    let fst = &annotated.fst;
    let Some(start) = fst.start() else {
        return Vec::new();
    };
    let mut word_pos: HashMap<ArcRef, usize> = HashMap::with_capacity(lattice_path.len());
    let mut pos = 0;
    for &a in lattice_path {
        word_pos.insert(a, pos);
        if annotated.lattice.arc(a).ilabel != 0 {
            pos += 1;
        }
    }
    let allowed = |s: StateId, i: usize| match annotated.arc_origin[s][i] {
        None => true,
        Some(o) => word_pos.contains_key(&o),
    };

    let n = fst.num_states();
    let mut reach = vec![false; n];
    reach[start] = true;
    for s in start..n {
        if !reach[s] {
            continue;
        }
        for (i, tr) in fst.arcs(s).iter().enumerate() {
            if allowed(s, i) {
                reach[tr.next] = true;
            }
        }
    }
    let mut coreach = vec![false; n];
    for s in (start..n).rev() {
        coreach[s] = reach[s]
            && (fst.is_final(s)
                || fst
                    .arcs(s)
                    .iter()
                    .enumerate()
                    .any(|(i, tr)| allowed(s, i) && coreach[tr.next]));
    }
    let usable = |s: StateId, i: usize| coreach[s] && allowed(s, i) && coreach[fst.arcs(s)[i].next];
    let pos_of = |s: StateId, i: usize| -> usize {
        annotated.arc_origin[s][i]
            .and_then(|o| word_pos.get(&o).copied())
            .unwrap_or(0)
    };

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (s, _) in coreach.iter().enumerate().skip(start).filter(|(_, &c)| c) {
        for (i, tr) in fst.arcs(s).iter().enumerate() {
            if !usable(s, i) {
                continue;
            }
            let Some(info) = begin_info(annotated, tr) else {
                continue;
            };
            let mut stack = vec![(tr.next, RegionBuilder::begin(annotated, info, tr, pos_of(s, i)))];
            while let Some((q, region)) = stack.pop() {
                for (j, t) in fst.arcs(q).iter().enumerate().rev() {
                    if !usable(q, j) {
                        continue;
                    }
                    let mut next = region.clone();
                    match next.feed(annotated, t, pos_of(q, j)) {
                        Feed::Done(a) => {
                            let key = (a.example, a.start, a.end, a.blanks, a.entities.clone());
                            if seen.insert(key) {
                                out.push((a, s));
                            }
                        }
                        Feed::Open => stack.push((t.next, next)),
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}
