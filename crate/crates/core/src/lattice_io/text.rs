//! Line-oriented FST text format.
//!
//! ```text
//! %sym <eps> 0
//! %sym <sigma> 1
//! %sym hello 2
//! 0 1 2 2 0.5
//! 1 0
//! ```
//!
//! `%sym token id` lines form the inline symbol table; arc lines are
//! `src dst ilabel olabel weight` with numeric labels; final lines are
//! `state [weight]`. State 0 is the start state. Without an inline table the
//! caller must supply a sidecar table.

use crate::error::{FstError, ParseError};
use crate::fst::{Fst, StateId, Transition};
use crate::symbols::{Label, SymbolTable};
use crate::weight::Weight;

const SYMBOL_PREFIX: &str = "%sym";

/// Canonical text: inline symbol table, then per state (ascending) its arcs
/// in stored order followed by its final line. The start state is written
/// as state 0.
pub fn serialize_fst(fst: &Fst, symbols: &SymbolTable) -> Result<String, FstError> {
    let start = fst.validate()?;
    if fst.finals().next().is_none() {
        return Err(FstError::NoFinal);
    }
    if let Some(l) = fst.labels().find(|&l| !symbols.contains_label(l)) {
        return Err(FstError::UnknownLabel(l));
    }
    let fst = if start == 0 {
        std::borrow::Cow::Borrowed(fst)
    } else {
        let mut order = vec![start];
        order.extend(fst.state_ids().filter(|&s| s != start));
        std::borrow::Cow::Owned(fst.renumber(&order))
    };

    let mut out = String::new();
    for (id, token) in symbols.iter() {
        out.push_str(&format!("{SYMBOL_PREFIX} {token} {id}\n"));
    }
    for s in fst.state_ids() {
        for tr in fst.arcs(s) {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                s, tr.next, tr.ilabel, tr.olabel, tr.weight
            ));
        }
        if let Some(w) = fst.final_weight(s) {
            out.push_str(&format!("{s} {w}\n"));
        }
    }
    Ok(out)
}

/// Parses FST text. The inline symbol table takes precedence over
/// `sidecar`; one of the two must be present.
pub fn parse_fst(text: &str, sidecar: Option<&SymbolTable>) -> Result<(Fst, SymbolTable), ParseError> {
    let mut sym_pairs: Vec<(String, Label)> = Vec::new();
    let mut arcs: Vec<(usize, StateId, Transition)> = Vec::new();
    let mut finals: Vec<(usize, StateId, Weight)> = Vec::new();
    let mut max_state: Option<StateId> = None;

    let malformed = |line: usize, reason: String| ParseError::Malformed { line, reason };

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == SYMBOL_PREFIX {
            if fields.len() != 3 {
                return Err(malformed(line_no, "expected `%sym token id`".into()));
            }
            let id: Label = fields[2]
                .parse()
                .map_err(|_| malformed(line_no, format!("bad symbol id `{}`", fields[2])))?;
            sym_pairs.push((fields[1].to_string(), id));
            continue;
        }
        let state = |f: &str| -> Result<StateId, ParseError> {
            f.parse()
                .map_err(|_| malformed(line_no, format!("bad state id `{f}`")))
        };
        let weight = |f: &str| -> Result<Weight, ParseError> {
            let w: f64 = f
                .parse()
                .map_err(|_| malformed(line_no, format!("bad weight `{f}`")))?;
            if w.is_nan() || w < 0.0 {
                return Err(malformed(line_no, format!("weight {w} must be a non-negative cost")));
            }
            Ok(Weight::new(w))
        };
        let label = |f: &str| -> Result<Label, ParseError> {
            f.parse()
                .map_err(|_| malformed(line_no, format!("bad label `{f}`")))
        };
        match fields.len() {
            1 | 2 => {
                let s = state(fields[0])?;
                let w = match fields.get(1) {
                    Some(f) => weight(f)?,
                    None => Weight::ONE,
                };
                max_state = max_state.max(Some(s));
                finals.push((line_no, s, w));
            }
            4 | 5 => {
                let src = state(fields[0])?;
                let dst = state(fields[1])?;
                let w = match fields.get(4) {
                    Some(f) => weight(f)?,
                    None => Weight::ONE,
                };
                let tr = Transition::new(label(fields[2])?, label(fields[3])?, w, dst);
                max_state = max_state.max(Some(src.max(dst)));
                arcs.push((line_no, src, tr));
            }
            n => return Err(malformed(line_no, format!("expected 1, 2, 4 or 5 fields, found {n}"))),
        }
    }

    let symbols = if !sym_pairs.is_empty() {
        SymbolTable::from_pairs(sym_pairs)?
    } else {
        sidecar.cloned().ok_or(ParseError::MissingSymbols)?
    };

    let mut fst = Fst::new();
    if let Some(max) = max_state {
        fst.add_states(max + 1);
        fst.set_start(0);
    }
    for (line, src, tr) in arcs {
        for l in [tr.ilabel, tr.olabel] {
            if !symbols.contains_label(l) {
                return Err(malformed(line, format!("label {l} not in symbol table")));
            }
        }
        fst.add_arc(src, tr);
    }
    for (line, s, w) in finals {
        if fst.is_final(s) {
            return Err(malformed(line, format!("state {s} declared final twice")));
        }
        fst.set_final(s, w);
    }
    Ok((fst, symbols))
}
