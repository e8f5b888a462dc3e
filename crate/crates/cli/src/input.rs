//! Input discovery and parsing.
//!
//! Every `*.wcn` or `*.fst` file in the input directory belongs to the
//! conversation named by its file name up to the first `.`; turns are
//! taken in file name order. A `.wcn` file may hold several blank-line
//! separated utterances, each one turn. A `.fst` file holds one turn in the
//! text format with an inline symbol table.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use intent_lattice::lattice_io::{concat_lattices, parse_fst, parse_wcn_document, wcn_to_fst, ConversationLattice, WcnOptions};
use intent_lattice::SymbolTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversation {
    pub id: String,
    pub files: Vec<PathBuf>,
}

/// Conversations of `dir`, sorted by id.
pub fn discover(dir: &Path) -> anyhow::Result<Vec<Conversation>> {
    let mut groups: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let is_input = matches!(path.extension().and_then(|e| e.to_str()), Some("wcn" | "fst"));
        if !path.is_file() || !is_input {
            continue;
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let id = name.split('.').next().unwrap_or(name).to_string();
        groups.entry(id).or_default().push(path);
    }
    Ok(groups
        .into_iter()
        .map(|(id, mut files)| {
            files.sort();
            Conversation { id, files }
        })
        .collect())
}

/// Reads every turn of `conv` with labels drawn from `symbols`, which is
/// extended with unseen words, and joins the turns.
pub fn load(conv: &Conversation, symbols: &mut SymbolTable, renormalize: bool) -> anyhow::Result<ConversationLattice> {
    let mut turns = Vec::new();
    for path in &conv.files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if path.extension().and_then(|e| e.to_str()) == Some("wcn") {
            let wcns = parse_wcn_document(&text, WcnOptions { renormalize })
                .with_context(|| format!("parsing {}", path.display()))?;
            turns.extend(wcns.iter().map(|w| wcn_to_fst(w, symbols)));
        } else {
            let (mut fst, own) = parse_fst(&text, None).with_context(|| format!("parsing {}", path.display()))?;
            let map = symbols.merge(&own);
            fst.relabel(&map);
            turns.push(fst);
        }
    }
    anyhow::ensure!(!turns.is_empty(), "conversation {} has no turns", conv.id);
    concat_lattices(&turns, &conv.id).with_context(|| format!("joining turns of {}", conv.id))
}
