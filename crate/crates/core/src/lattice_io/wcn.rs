use crate::error::ParseError;
use crate::fst::{Fst, Transition};
use crate::symbols::{SymbolTable, EPSILON, EPSILON_TOKEN};
use crate::weight::Weight;

/// Allowed deviation of a slot's posterior sum from 1.
pub const POSTERIOR_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Default)]
pub struct WcnOptions {
    /// Rescale each slot to sum to 1 instead of rejecting it.
    pub renormalize: bool,
}

/// A word confusion network: a chain of slots of competing words.
#[derive(Debug, Clone, PartialEq)]
pub struct Wcn {
    slots: Vec<Vec<(String, f64)>>,
}

impl Wcn {
    /// Validates slot contents. Posteriors must lie in (0, 1] and sum to 1
    /// within [`POSTERIOR_TOLERANCE`].
    pub fn new(slots: Vec<Vec<(String, f64)>>) -> Result<Self, ParseError> {
        for (i, slot) in slots.iter().enumerate() {
            if slot.is_empty() {
                return Err(ParseError::EmptySlot { line: i + 1 });
            }
            let sum: f64 = slot.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > POSTERIOR_TOLERANCE {
                return Err(ParseError::PosteriorSum {
                    slot: i,
                    line: i + 1,
                    sum,
                });
            }
        }
        let wcn = Wcn { slots };
        wcn.check_words()?;
        Ok(wcn)
    }

    fn check_words(&self) -> Result<(), ParseError> {
        let has_word = self
            .slots
            .iter()
            .any(|slot| slot.iter().any(|(t, _)| t != EPSILON_TOKEN));
        if has_word {
            Ok(())
        } else {
            Err(ParseError::NoWords)
        }
    }

    pub fn slots(&self) -> &[Vec<(String, f64)>] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Per-slot most probable token (first on ties), ε included.
    pub fn argmax_tokens(&self) -> Vec<&str> {
        self.slots
            .iter()
            .map(|slot| {
                let mut best = &slot[0];
                for alt in &slot[1..] {
                    if alt.1 > best.1 {
                        best = alt;
                    }
                }
                best.0.as_str()
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for slot in &self.slots {
            let line: Vec<String> = slot.iter().map(|(t, p)| format!("{t}:{p}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses a text holding exactly one utterance.
pub fn parse_wcn(text: &str) -> Result<Wcn, ParseError> {
    parse_wcn_with(text, WcnOptions::default())
}

fn parse_wcn_with(text: &str, options: WcnOptions) -> Result<Wcn, ParseError> {
    let mut utterances = parse_wcn_document(text, options)?;
    match utterances.len() {
        0 => Err(ParseError::NoUtterance),
        1 => Ok(utterances.pop().unwrap()),
        n => Err(ParseError::MultipleUtterances(n)),
    }
}

/// Parses a document of blank-line separated utterances.
///
/// Each line is one slot of space-separated `token:posterior` pairs; `#`
/// starts a comment line and `<eps>` is the empty word.
pub fn parse_wcn_document(text: &str, options: WcnOptions) -> Result<Vec<Wcn>, ParseError> {
    let mut utterances = Vec::new();
    let mut current: Vec<Vec<(String, f64)>> = Vec::new();

    let mut flush = |current: &mut Vec<Vec<(String, f64)>>| -> Result<(), ParseError> {
        if current.is_empty() {
            return Ok(());
        }
        let wcn = Wcn {
            slots: std::mem::take(current),
        };
        wcn.check_words()?;
        utterances.push(wcn);
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut current)?;
            continue;
        }
        let mut slot = Vec::new();
        for pair in line.split_whitespace() {
            let (token, post) = pair.rsplit_once(':').ok_or_else(|| ParseError::Malformed {
                line: line_no,
                reason: format!("expected `token:posterior`, found `{pair}`"),
            })?;
            if token.is_empty() {
                return Err(ParseError::Malformed {
                    line: line_no,
                    reason: format!("empty token in `{pair}`"),
                });
            }
            let p: f64 = post.parse().map_err(|_| ParseError::Malformed {
                line: line_no,
                reason: format!("bad posterior `{post}`"),
            })?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(ParseError::Malformed {
                    line: line_no,
                    reason: format!("posterior {p} outside (0, 1]"),
                });
            }
            slot.push((token.to_string(), p));
        }
        let sum: f64 = slot.iter().map(|(_, p)| p).sum();
        if options.renormalize {
            for alt in &mut slot {
                alt.1 /= sum;
            }
        } else if (sum - 1.0).abs() > POSTERIOR_TOLERANCE {
            return Err(ParseError::PosteriorSum {
                slot: current.len(),
                line: line_no,
                sum,
            });
        }
        current.push(slot);
    }
    flush(&mut current)?;
    Ok(utterances)
}

/// Chain acceptor with one state per slot boundary; each alternative
/// becomes an arc weighted by its negative log posterior.
pub fn wcn_to_fst(wcn: &Wcn, symbols: &mut SymbolTable) -> Fst {
    let mut fst = Fst::new();
    fst.add_states(wcn.slots.len() + 1);
    fst.set_start(0);
    for (i, slot) in wcn.slots.iter().enumerate() {
        for (token, p) in slot {
            let label = if token == EPSILON_TOKEN {
                EPSILON
            } else {
                symbols.intern(token)
            };
            fst.add_arc(i, Transition::acceptor(label, Weight::from_probability(*p), i + 1));
        }
    }
    fst.set_final(wcn.slots.len(), Weight::ONE);
    fst
}
