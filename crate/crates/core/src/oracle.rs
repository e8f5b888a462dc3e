//! Brute-force reference matcher. It works on plain word lists and
//! enumerated lattice paths and shares no code with composition or
//! pruning, so it can check them.

use std::collections::BTreeSet;

use crate::bestpath::EntityFill;
use crate::error::FstError;
use crate::fst::{enumerate_paths, Fst, Path};
use crate::index::{IntentExample, IntentLibrary, Token};
use crate::symbols::{SymbolTable, EPSILON};

/// A placement of one example on a word sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleMatch {
    pub path: usize,
    pub start: usize,
    pub end: usize,
    pub example: usize,
    pub intent_id: String,
    pub example_id: String,
    pub words: Vec<String>,
    pub blanks: usize,
    pub entities: Vec<EntityFill>,
}

type Placement = (usize, usize, usize, Vec<String>, Vec<EntityFill>);

struct Search<'a> {
    words: &'a [String],
    example: &'a IntentExample,
    phrases: Vec<Vec<Vec<String>>>,
    found: BTreeSet<Placement>,
}

impl Search<'_> {
    fn place(&mut self, k: usize, pos: usize, start: usize, blanks: usize, matched: &mut Vec<String>, fills: &mut Vec<EntityFill>) {
        let n = self.words.len();
        let mut options: Vec<(usize, Option<EntityFill>)> = Vec::new();
        match &self.example.tokens[k] {
            Token::Word(w) => {
                if self.words[pos] == *w {
                    options.push((1, None));
                }
            }
            Token::Entity(name) => {
                for phrase in &self.phrases[k] {
                    if pos + phrase.len() <= n && self.words[pos..pos + phrase.len()] == phrase[..] {
                        options.push((
                            phrase.len(),
                            Some(EntityFill {
                                name: name.clone(),
                                position: k,
                                tokens: phrase.clone(),
                            }),
                        ));
                    }
                }
            }
        }
        for (len, fill) in options {
            let end = pos + len - 1;
            let before = matched.len();
            matched.extend_from_slice(&self.words[pos..=end]);
            let has_fill = fill.is_some();
            if let Some(f) = fill {
                fills.push(f);
            }
            if k + 1 == self.example.tokens.len() {
                self.found
                    .insert((start, end, blanks, matched.clone(), fills.clone()));
            } else {
                for gap in 0..=(self.example.blank_quota - blanks) {
                    let next = end + 1 + gap;
                    if next >= n {
                        break;
                    }
                    self.place(k + 1, next, start, blanks + gap, matched, fills);
                }
            }
            if has_fill {
                fills.pop();
            }
            matched.truncate(before);
        }
    }
}

/// All placements of all examples on `words`: example tokens in order,
/// entity placeholders covered by a contiguous entity phrase, and at most
/// the example's quota of extra words in total, only between tokens.
pub fn match_linear<S: AsRef<str>>(words: &[S], library: &IntentLibrary) -> Vec<OracleMatch> {
    let words: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
    let mut out = Vec::new();
    for (e, example) in library.examples().enumerate() {
        let phrases = example
            .tokens
            .iter()
            .map(|t| match t {
                Token::Entity(name) => {
                    let mut p = library.entities.get(name).cloned().unwrap_or_default();
                    p.sort();
                    p.dedup();
                    p
                }
                Token::Word(_) => Vec::new(),
            })
            .collect();
        let mut search = Search {
            words: &words,
            example,
            phrases,
            found: BTreeSet::new(),
        };
        for start in 0..words.len() {
            search.place(0, start, start, 0, &mut Vec::new(), &mut Vec::new());
        }
        for (start, end, blanks, matched, entities) in search.found {
            out.push(OracleMatch {
                path: 0,
                start,
                end,
                example: e,
                intent_id: example.intent_id.clone(),
                example_id: example.example_id.clone(),
                words: matched,
                blanks,
                entities,
            });
        }
    }
    out.sort();
    out
}

/// One enumerated lattice path with its words (ε removed) and matches.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatches {
    pub path: Path,
    pub words: Vec<String>,
    pub matches: Vec<OracleMatch>,
}

/// Enumerates every lattice path (at most `limit`) and matches each one.
pub fn match_lattice(
    lattice: &Fst,
    symbols: &SymbolTable,
    library: &IntentLibrary,
    limit: usize,
) -> Result<Vec<PathMatches>, FstError> {
    let paths = enumerate_paths(lattice, limit)?;
    Ok(paths
        .into_iter()
        .enumerate()
        .map(|(i, path)| {
            let words: Vec<String> = path
                .input_labels(lattice)
                .into_iter()
                .filter(|&l| l != EPSILON)
                .map(|l| symbols.resolve(l).to_string())
                .collect();
            let mut matches = match_linear(&words, library);
            for m in &mut matches {
                m.path = i;
            }
            PathMatches { path, words, matches }
        })
        .collect())
}

/// A candidate for [`select_reference`]: path cost and, per annotation,
/// (intent words, span including blanks).
pub type ReferenceCandidate = (f64, Vec<(usize, usize)>);

/// Reference path choice: sorts explicit tuples (longest annotation desc,
/// annotation count desc, longest span desc, cost asc, position asc) and
/// returns the position of the first.
pub fn select_reference(candidates: &[ReferenceCandidate]) -> Option<usize> {
    let mut rows: Vec<(usize, usize, usize, f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, (cost, anns))| {
            let a = anns.iter().map(|x| x.0).max().unwrap_or(0);
            let c = anns.iter().map(|x| x.1).max().unwrap_or(0);
            (a, anns.len(), c, *cost, i)
        })
        .collect();
    rows.sort_by(|x, y| {
        y.0.cmp(&x.0)
            .then(y.1.cmp(&x.1))
            .then(y.2.cmp(&x.2))
            .then(x.3.total_cmp(&y.3))
            .then(x.4.cmp(&y.4))
    });
    rows.first().map(|r| r.4)
}
