//! Line-delimited output records.

use std::io::BufRead;
use std::path::Path;

use anyhow::Context;
use intent_lattice::bestpath::{Annotation, Provenance};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub name: String,
    pub position: usize,
    pub tokens: Vec<String>,
}

/// One annotation. `start` and `end` index the words of the conversation
/// transcript; `turn` is the turn of the first matched word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub conversation: String,
    pub turn: usize,
    pub intent_id: String,
    pub example_id: String,
    pub start: usize,
    pub end: usize,
    pub words: Vec<String>,
    pub blanks: usize,
    pub entities: Vec<EntityRecord>,
    pub rescored: bool,
    /// Transcript positions inside the span whose word replaced the best
    /// path hypothesis.
    #[serde(default)]
    pub rescored_positions: Vec<usize>,
}

impl AnnotationRecord {
    pub fn new(conversation: &str, turns: &[usize], provenance: Option<&[Provenance]>, a: &Annotation) -> Self {
        let rescored_positions = provenance
            .map(|p| (a.start..=a.end).filter(|&i| p[i] == Provenance::Rescored).collect())
            .unwrap_or_default();
        AnnotationRecord {
            conversation: conversation.to_string(),
            turn: turns[a.start],
            intent_id: a.intent_id.clone(),
            example_id: a.example_id.clone(),
            start: a.start,
            end: a.end,
            words: a.words.clone(),
            blanks: a.blanks,
            entities: a
                .entities
                .iter()
                .map(|e| EntityRecord {
                    name: e.name.clone(),
                    position: e.position,
                    tokens: e.tokens.clone(),
                })
                .collect(),
            rescored: a.rescored,
            rescored_positions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub text: String,
}

/// Transcript of one conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub conversation: String,
    pub turns: Vec<TurnRecord>,
    pub words: usize,
    pub rescored_words: usize,
    pub baseline: Vec<TurnRecord>,
}

/// Reads a file of annotation records.
pub fn read_annotations(path: &Path) -> anyhow::Result<Vec<AnnotationRecord>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).with_context(|| format!("{}:{}: bad annotation record", path.display(), i + 1))?,
        );
    }
    Ok(out)
}
