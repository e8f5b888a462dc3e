use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use intent_lattice::bestpath::{baseline, Annotation};
use intent_lattice::lattice_io::ConversationLattice;
use intent_lattice::{rescore, ArcRef, IndexTransducer, RescoreOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::input::{discover, load, Conversation};
use crate::records::{AnnotationRecord, TranscriptRecord, TurnRecord};
use crate::RunConfig;

pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const BASELINE_FILE: &str = "baseline.jsonl";
pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub conversation: String,
    pub error: String,
}

/// Corpus totals written to `summary.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RescoreSummary {
    pub conversations: usize,
    pub failed: Vec<Failure>,
    pub words: usize,
    pub rescored_words: usize,
    pub annotations: usize,
    pub baseline_annotations: usize,
    /// Transcript words inside at least one annotation.
    pub annotated_words: usize,
    pub baseline_annotated_words: usize,
    /// Annotated words that replaced the best path hypothesis.
    pub rescored_annotated_words: usize,
}

struct Output {
    transcript: TranscriptRecord,
    annotations: Vec<AnnotationRecord>,
    baseline: Vec<AnnotationRecord>,
    annotated_words: usize,
    baseline_annotated_words: usize,
    rescored_annotated_words: usize,
}

fn covered(annotations: &[Annotation]) -> BTreeSet<usize> {
    annotations.iter().flat_map(|a| a.start..=a.end).collect()
}

fn turn_texts(conv: &ConversationLattice, words: &[String], turns: &[usize]) -> Vec<TurnRecord> {
    (0..conv.boundaries.len())
        .map(|t| TurnRecord {
            turn: t,
            text: words
                .iter()
                .zip(turns)
                .filter(|(_, &u)| u == t)
                .map(|(w, _)| w.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect()
}

fn process(index: &IndexTransducer, conv: &Conversation, config: &RunConfig) -> anyhow::Result<Output> {
    let mut symbols = index.symbols.clone();
    let lattice = load(conv, &mut symbols, config.renormalize)?;
    let turns_of = |arcs: &[ArcRef]| -> Vec<usize> {
        arcs.iter()
            .map(|a| lattice.turn_of(a.state).expect("arc inside a turn"))
            .collect()
    };

    if config.baseline_only {
        let (words, arcs, anns) = baseline(&lattice.fst, &symbols, index, config.min_span)?;
        let turns = turns_of(&arcs);
        let records: Vec<_> = anns
            .iter()
            .map(|a| AnnotationRecord::new(&conv.id, &turns, None, a))
            .collect();
        let texts = turn_texts(&lattice, &words, &turns);
        let n = covered(&anns).len();
        return Ok(Output {
            transcript: TranscriptRecord {
                conversation: conv.id.clone(),
                turns: texts.clone(),
                words: words.len(),
                rescored_words: 0,
                baseline: texts,
            },
            annotations: records.clone(),
            baseline: records,
            annotated_words: n,
            baseline_annotated_words: n,
            rescored_annotated_words: 0,
        });
    }

    let options = RescoreOptions {
        min_span: config.min_span,
        limit: config.limit,
    };
    let out = rescore(&lattice.fst, &symbols, index, options)
        .with_context(|| format!("rescoring {}", conv.id))?;
    let turns = turns_of(&out.word_arcs);
    let base_turns = turns_of(&out.baseline_word_arcs);
    let cover = covered(&out.annotations);
    Ok(Output {
        transcript: TranscriptRecord {
            conversation: conv.id.clone(),
            turns: turn_texts(&lattice, &out.words, &turns),
            words: out.words.len(),
            rescored_words: out.rescored_words(),
            baseline: turn_texts(&lattice, &out.baseline_words, &base_turns),
        },
        annotations: out
            .annotations
            .iter()
            .map(|a| AnnotationRecord::new(&conv.id, &turns, Some(&out.provenance), a))
            .collect(),
        baseline: out
            .baseline_annotations
            .iter()
            .map(|a| AnnotationRecord::new(&conv.id, &base_turns, None, a))
            .collect(),
        annotated_words: cover.len(),
        baseline_annotated_words: covered(&out.baseline_annotations).len(),
        rescored_annotated_words: cover
            .iter()
            .filter(|&&i| out.provenance[i] == intent_lattice::bestpath::Provenance::Rescored)
            .count(),
    })
}

fn write_lines<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> anyhow::Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Rescores every conversation of `config.inputs` and writes transcripts,
/// annotation records, baseline records and a summary to `config.out`.
/// Output bytes do not depend on `config.jobs`.
pub fn rescore_cmd(config: &RunConfig) -> anyhow::Result<RescoreSummary> {
    config.validate()?;
    let text = fs::read_to_string(&config.index).with_context(|| format!("reading {}", config.index.display()))?;
    let index = IndexTransducer::from_artifact(&text).with_context(|| format!("loading {}", config.index.display()))?;
    let conversations = discover(&config.inputs)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    let results: Vec<anyhow::Result<Output>> =
        pool.install(|| conversations.par_iter().map(|c| process(&index, c, config)).collect());

    let mut summary = RescoreSummary::default();
    let mut outputs = Vec::new();
    for (conv, result) in conversations.iter().zip(results) {
        match result {
            Ok(out) => {
                summary.conversations += 1;
                summary.words += out.transcript.words;
                summary.rescored_words += out.transcript.rescored_words;
                summary.annotations += out.annotations.len();
                summary.baseline_annotations += out.baseline.len();
                summary.annotated_words += out.annotated_words;
                summary.baseline_annotated_words += out.baseline_annotated_words;
                summary.rescored_annotated_words += out.rescored_annotated_words;
                outputs.push(out);
            }
            Err(e) if config.strict => return Err(e.context(format!("conversation {}", conv.id))),
            Err(e) => {
                eprintln!("warning: skipping conversation {}: {e:#}", conv.id);
                summary.failed.push(Failure {
                    conversation: conv.id.clone(),
                    error: format!("{e:#}"),
                });
            }
        }
    }

    fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    write_lines(
        &config.out.join(ANNOTATIONS_FILE),
        outputs.iter().flat_map(|o| &o.annotations),
    )?;
    write_lines(&config.out.join(BASELINE_FILE), outputs.iter().flat_map(|o| &o.baseline))?;
    write_lines(&config.out.join(TRANSCRIPTS_FILE), outputs.iter().map(|o| &o.transcript))?;
    fs::write(
        config.out.join(SUMMARY_FILE),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(summary)
}
