//! Rescored-versus-baseline comparison of annotation files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::records::{read_annotations, AnnotationRecord};
use crate::rescore_cmd::RescoreSummary;

/// Relative increase from `baseline` to `rescored` in percent; `None` when
/// the baseline is zero and the rescored count is not.
pub fn percent_increase(baseline: usize, rescored: usize) -> Option<f64> {
    match (baseline, rescored) {
        (0, 0) => Some(0.0),
        (0, _) => None,
        (b, r) => Some((r as f64 - b as f64) / b as f64 * 100.0),
    }
}

/// Ranked percentiles: improvements sorted in decreasing order; for the top
/// 10%, 20%, ..., 90% of classes, the smallest improvement among them.
pub fn percentile_table(improvements: &[f64]) -> Vec<PercentileRow> {
    if improvements.is_empty() {
        return Vec::new();
    }
    let mut sorted = improvements.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    (1..=9)
        .map(|k| {
            let percent = k * 10;
            let take = (percent * n).div_ceil(100).max(1);
            PercentileRow {
                classes_percent: percent,
                min_improvement_percent: sorted[take - 1],
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileRow {
    pub classes_percent: usize,
    pub min_improvement_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentRow {
    pub intent_id: String,
    pub baseline: usize,
    pub rescored: usize,
    pub increase_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordShares {
    pub words: usize,
    pub rescored_coverage_percent: f64,
    pub baseline_coverage_percent: f64,
    /// Rescored annotated words as a share of all words.
    pub rescored_of_all_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub rescored_intents: usize,
    pub baseline_intents: usize,
    pub increase_percent: Option<f64>,
    pub annotated_words: usize,
    pub baseline_annotated_words: usize,
    pub rescored_annotated_words: usize,
    /// Rescored annotated words as a share of annotated words.
    pub rescored_annotated_percent: f64,
    pub words: Option<WordShares>,
    pub per_intent: Vec<IntentRow>,
    /// Intent classes found only after rescoring; left out of the
    /// percentile table.
    pub new_intents: usize,
    pub percentiles: Vec<PercentileRow>,
}

fn coverage(records: &[AnnotationRecord]) -> (usize, usize) {
    let mut all: BTreeSet<(&str, usize)> = BTreeSet::new();
    let mut rescored: BTreeSet<(&str, usize)> = BTreeSet::new();
    for r in records {
        all.extend((r.start..=r.end).map(|i| (r.conversation.as_str(), i)));
        rescored.extend(r.rescored_positions.iter().map(|&i| (r.conversation.as_str(), i)));
    }
    (all.len(), rescored.len())
}

fn share(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64 * 100.0
    }
}

impl StatsReport {
    pub fn new(rescored: &[AnnotationRecord], baseline: &[AnnotationRecord], total_words: Option<usize>) -> Self {
        let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for r in baseline {
            counts.entry(&r.intent_id).or_default().0 += 1;
        }
        for r in rescored {
            counts.entry(&r.intent_id).or_default().1 += 1;
        }
        let per_intent: Vec<IntentRow> = counts
            .iter()
            .map(|(id, &(b, r))| IntentRow {
                intent_id: id.to_string(),
                baseline: b,
                rescored: r,
                increase_percent: percent_increase(b, r),
            })
            .collect();
        let improvements: Vec<f64> = per_intent
            .iter()
            .filter(|row| row.baseline > 0)
            .filter_map(|row| row.increase_percent)
            .collect();
        let (annotated, rescored_words) = coverage(rescored);
        let (baseline_annotated, _) = coverage(baseline);
        StatsReport {
            rescored_intents: rescored.len(),
            baseline_intents: baseline.len(),
            increase_percent: percent_increase(baseline.len(), rescored.len()),
            annotated_words: annotated,
            baseline_annotated_words: baseline_annotated,
            rescored_annotated_words: rescored_words,
            rescored_annotated_percent: share(rescored_words, annotated),
            words: total_words.map(|w| WordShares {
                words: w,
                rescored_coverage_percent: share(annotated, w),
                baseline_coverage_percent: share(baseline_annotated, w),
                rescored_of_all_percent: share(rescored_words, w),
            }),
            new_intents: per_intent.iter().filter(|r| r.baseline == 0 && r.rescored > 0).count(),
            per_intent,
            percentiles: percentile_table(&improvements),
        }
    }

    pub fn render(&self) -> String {
        let pct = |p: Option<f64>| p.map_or("n/a".to_string(), |v| format!("{v:.1}%"));
        let mut s = String::new();
        let _ = writeln!(s, "intents found (rescored): {}", self.rescored_intents);
        let _ = writeln!(s, "intents found (baseline): {}", self.baseline_intents);
        let _ = writeln!(s, "increase: {}", pct(self.increase_percent));
        let _ = writeln!(
            s,
            "annotated words: {} (baseline {}), rescored: {} ({:.1}% of annotated)",
            self.annotated_words, self.baseline_annotated_words, self.rescored_annotated_words, self.rescored_annotated_percent
        );
        if let Some(w) = &self.words {
            let _ = writeln!(
                s,
                "coverage of {} words: rescored {:.1}%, baseline {:.1}%, rescored words {:.2}%",
                w.words, w.rescored_coverage_percent, w.baseline_coverage_percent, w.rescored_of_all_percent
            );
        }
        let _ = writeln!(s, "\n{:<24} {:>9} {:>9} {:>10}", "intent", "baseline", "rescored", "increase");
        for row in &self.per_intent {
            let _ = writeln!(
                s,
                "{:<24} {:>9} {:>9} {:>10}",
                row.intent_id,
                row.baseline,
                row.rescored,
                pct(row.increase_percent)
            );
        }
        if self.new_intents > 0 {
            let _ = writeln!(s, "intent classes found only after rescoring: {}", self.new_intents);
        }
        if !self.percentiles.is_empty() {
            let _ = writeln!(s, "\n{:>18} {:>22}", "intent classes [%]", "min. improvement [%]");
            for row in &self.percentiles {
                let _ = writeln!(s, "{:>18} {:>22.1}", row.classes_percent, row.min_improvement_percent);
            }
        }
        s
    }
}

/// Compares two annotation files; `summary` (a rescoring `summary.json`)
/// supplies the total word count for coverage shares.
pub fn stats_cmd(rescored: &Path, baseline: &Path, summary: Option<&Path>) -> anyhow::Result<StatsReport> {
    let r = read_annotations(rescored)?;
    let b = read_annotations(baseline)?;
    let words = match summary {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let s: RescoreSummary =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            Some(s.words)
        }
        None => None,
    };
    Ok(StatsReport::new(&r, &b, words))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(conv: &str, intent: &str, start: usize, end: usize) -> AnnotationRecord {
        AnnotationRecord {
            conversation: conv.into(),
            turn: 0,
            intent_id: intent.into(),
            example_id: format!("{intent}/0"),
            start,
            end,
            words: vec![],
            blanks: 0,
            entities: vec![],
            rescored: false,
            rescored_positions: vec![],
        }
    }

    #[test]
    fn reported_corpus_increase() {
        let p = percent_increase(526_356, 658_549).unwrap();
        assert_eq!(format!("{p:.1}"), "25.1");
    }

    #[test]
    fn identical_inputs_give_zero() {
        let rows = vec![record("c", "a", 0, 2), record("c", "b", 4, 6)];
        let report = StatsReport::new(&rows, &rows, Some(10));
        assert_eq!(report.increase_percent, Some(0.0));
        assert!(report.per_intent.iter().all(|r| r.increase_percent == Some(0.0)));
        assert_eq!(report.annotated_words, 6);
        assert_eq!(report.words.unwrap().rescored_coverage_percent, 60.0);
    }

    #[test]
    fn zero_baseline() {
        assert_eq!(percent_increase(0, 0), Some(0.0));
        assert_eq!(percent_increase(0, 3), None);
        assert_eq!(percent_increase(4, 2), Some(-50.0));
    }

    #[test]
    fn percentiles_take_bin_minimum() {
        let imp: Vec<f64> = (1..=20).map(|i| i as f64 * 10.0).collect();
        let t = percentile_table(&imp);
        assert_eq!(t.len(), 9);
        assert_eq!((t[0].classes_percent, t[0].min_improvement_percent), (10, 190.0));
        assert_eq!((t[4].classes_percent, t[4].min_improvement_percent), (50, 110.0));
        assert_eq!((t[8].classes_percent, t[8].min_improvement_percent), (90, 30.0));
        assert!(percentile_table(&[]).is_empty());
        let one = percentile_table(&[7.0]);
        assert!(one.iter().all(|r| r.min_improvement_percent == 7.0));
    }

    #[test]
    fn new_classes_excluded_from_percentiles() {
        let b = vec![record("c", "a", 0, 1)];
        let r = vec![record("c", "a", 0, 1), record("c", "a", 3, 4), record("c", "n", 6, 7)];
        let report = StatsReport::new(&r, &b, None);
        assert_eq!(report.new_intents, 1);
        assert_eq!(report.percentiles[0].min_improvement_percent, 100.0);
        assert_eq!(report.increase_percent, Some(200.0));
    }
}
