use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use intent_lattice::index::{compile, IntentLibrary};
use intent_lattice_cli::records::{read_annotations, TranscriptRecord};
use intent_lattice_cli::RescoreSummary;
use tempfile::TempDir;

const LIBRARY: &str = r#"{
    "defaults": {"blank_quota": 0},
    "intents": [
        {"id": "cancel", "name": "Cancellation", "examples": [
            {"tokens": ["cancel", "account", "please"], "blank_quota": 1}]},
        {"id": "apology", "name": "Apology", "examples": [
            {"tokens": ["i", "apologize"]},
            {"tokens": ["am", "sorry"]}]},
        {"id": "tickets", "name": "Tickets", "examples": [
            {"tokens": ["tickets", "for", "__SYSTEM_TIME__"]}]},
        {"id": "end_of_hold", "name": "End of Hold", "examples": [
            {"tokens": ["thank", "you", "for", "your", "patience"]}]}
    ],
    "entities": {"__SYSTEM_TIME__": [["seven", "p", "m"], ["tomorrow", "at", "seven"]]}
}"#;

const HOLD: &str = "\
okay:1
thank:1
you:1
for:0.9 four:0.1
your:0.8 you're:0.2
patients:0.6 patience:0.4

so:1
cancel:1
my:1
account:1
please:0.7 pleas:0.3
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_intent-lattice"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Setup {
    dir: TempDir,
}

impl Setup {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("library.json"), LIBRARY).unwrap();
        fs::create_dir(dir.path().join("in")).unwrap();
        Setup { dir }
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.dir.path().join(name)
    }

    fn input(&self, name: &str, text: &str) {
        fs::write(self.path("in").join(name), text).unwrap();
    }

    fn build(&self) {
        let out = run(&["build-index", "--library", p(&self.path("library.json")), "--out", p(&self.path("index.json"))]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    fn rescore(&self, out: &str, extra: &[&str]) -> Output {
        let (index, inputs, out_dir) = (self.path("index.json"), self.path("in"), self.path(out));
        let mut args = vec!["rescore", "--index", p(&index), "--inputs", p(&inputs), "--out", p(&out_dir)];
        args.extend_from_slice(extra);
        bin().args(&args).output().unwrap()
    }

    fn transcripts(&self, out: &str) -> Vec<TranscriptRecord> {
        fs::read_to_string(self.path(out).join("transcripts.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    fn summary(&self, out: &str) -> RescoreSummary {
        serde_json::from_str(&fs::read_to_string(self.path(out).join("summary.json")).unwrap()).unwrap()
    }
}

#[test]
fn build_index_reports_intents_and_is_deterministic() {
    let s = Setup::new();
    let out = run(&["build-index", "--library", p(&s.path("library.json")), "--out", p(&s.path("a.json"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("4 intents"));
    run(&["build-index", "--library", p(&s.path("library.json")), "--out", p(&s.path("b.json"))]);
    assert_eq!(fs::read(s.path("a.json")).unwrap(), fs::read(s.path("b.json")).unwrap());
}

#[test]
fn library_errors_exit_with_data_code() {
    let s = Setup::new();
    fs::write(s.path("empty.json"), r#"{"intents": []}"#).unwrap();
    let out = run(&["build-index", "--library", p(&s.path("empty.json")), "--out", p(&s.path("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("library has no intents"));

    fs::write(s.path("bad.json"), r#"{"intents": [{"id": 1, "examples": [{"tokens": ["a", 5]}]}]}"#).unwrap();
    let out = run(&["build-index", "--library", p(&s.path("bad.json")), "--out", p(&s.path("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/intents/0/examples/0/tokens/1"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["rescore"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let s = Setup::new();
    s.build();
    assert_eq!(s.rescore("out", &["--min-span", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn rescores_patients_to_patience() {
    let s = Setup::new();
    s.build();
    s.input("call1.wcn", HOLD);
    let out = s.rescore("out", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = &s.transcripts("out")[0];
    assert_eq!(t.turns[0].text, "okay thank you for your patience");
    assert_eq!(t.baseline[0].text, "okay thank you for your patients");
    assert_eq!(t.turns[1].text, "so cancel my account please");
    assert_eq!(t.rescored_words, 1);

    let anns = read_annotations(&s.path("out").join("annotations.jsonl")).unwrap();
    let ids: Vec<_> = anns.iter().map(|a| (a.intent_id.as_str(), a.turn, a.rescored)).collect();
    assert_eq!(ids, vec![("end_of_hold", 0, true), ("cancel", 1, false)]);
    assert_eq!(anns[0].rescored_positions, vec![5]);
    let base = read_annotations(&s.path("out").join("baseline.jsonl")).unwrap();
    assert_eq!(base.len(), 1);

    let summary = s.summary("out");
    assert_eq!((summary.annotations, summary.baseline_annotations), (2, 1));
    assert_eq!(summary.words, 11);
}

#[test]
fn library_without_matches_keeps_best_path() {
    let s = Setup::new();
    fs::write(s.path("index.json"), compile(&IntentLibrary::new()).unwrap().to_artifact()).unwrap();
    s.input("c.wcn", "a:0.4 b:0.6\n<eps>:0.7 c:0.3\nd:1\n");
    let out = s.rescore("out", &[]);
    assert_eq!(out.status.code(), Some(0));
    let t = &s.transcripts("out")[0];
    assert_eq!(t.turns[0].text, "b d");
    assert_eq!(s.summary("out").annotations, 0);
}

#[test]
fn fst_turns_join_wcn_turns() {
    let s = Setup::new();
    s.build();
    s.input(
        "call.0.fst",
        "%sym <eps> 0\n%sym <sigma> 1\n%sym i 2\n%sym am 3\n%sym sorry 4\n%sym soy 5\n0 1 2 2 0\n1 2 3 3 0\n2 3 5 5 0.4\n2 3 4 4 0.9\n3 0\n",
    );
    s.input("call.1.wcn", "thanks:1\n");
    let out = s.rescore("out", &["--min-span", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = &s.transcripts("out")[0];
    assert_eq!(t.conversation, "call");
    assert_eq!(t.turns.len(), 2);
    assert_eq!(t.turns[0].text, "i am sorry");
    assert_eq!(t.turns[1].text, "thanks");
}

#[test]
fn bad_input_is_skipped_unless_strict() {
    let s = Setup::new();
    s.build();
    s.input("good.wcn", HOLD);
    s.input("bad.wcn", "hello:0.5 world:0.2\n");
    let out = s.rescore("out", &[]);
    assert_eq!(out.status.code(), Some(0));
    let summary = s.summary("out");
    assert_eq!(summary.conversations, 1);
    assert_eq!(summary.failed.len(), 1);
    assert_eq!(summary.failed[0].conversation, "bad");

    let out = s.rescore("strict", &["--strict"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!s.path("strict").exists());

    let out = s.rescore("renorm", &["--renormalize"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(s.summary("renorm").failed.is_empty());
}

#[test]
fn baseline_only_annotates_best_path() {
    let s = Setup::new();
    s.build();
    s.input("call1.wcn", HOLD);
    assert!(s.rescore("out", &["--baseline-only"]).status.success());
    let t = &s.transcripts("out")[0];
    assert_eq!(t.turns[0].text, "okay thank you for your patients");
    let anns = read_annotations(&s.path("out").join("annotations.jsonl")).unwrap();
    assert_eq!(anns.len(), 1);
    assert_eq!(anns[0].intent_id, "cancel");
}

#[test]
fn outputs_do_not_depend_on_jobs() {
    let s = Setup::new();
    s.build();
    for k in 0..12 {
        s.input(&format!("c{k:02}.wcn"), HOLD);
    }
    assert!(s.rescore("one", &["--jobs", "1"]).status.success());
    assert!(s.rescore("many", &["--jobs", "8"]).status.success());
    for f in ["annotations.jsonl", "baseline.jsonl", "transcripts.jsonl", "summary.json"] {
        assert_eq!(
            fs::read(s.path("one").join(f)).unwrap(),
            fs::read(s.path("many").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn stats_compares_annotation_files() {
    let s = Setup::new();
    s.build();
    s.input("call1.wcn", HOLD);
    assert!(s.rescore("out", &[]).status.success());
    let ann = s.path("out").join("annotations.jsonl");
    let base = s.path("out").join("baseline.jsonl");
    let summary = s.path("out").join("summary.json");

    let out = run(&["stats", "--rescored", p(&ann), "--baseline", p(&base), "--summary", p(&summary), "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["increase_percent"], 100.0);
    assert_eq!(report["rescored_intents"], 2);
    assert_eq!(report["words"]["words"], 11);

    let out = run(&["stats", "--rescored", p(&base), "--baseline", p(&base)]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("increase: 0.0%"));
}

#[test]
fn overrides_quota_and_entities() {
    let s = Setup::new();
    fs::write(s.path("entities.json"), r#"{"__SYSTEM_TIME__": ["noon", "half past six"]}"#).unwrap();
    let out = run(&[
        "build-index",
        "--library",
        p(&s.path("library.json")),
        "--out",
        p(&s.path("index.json")),
        "--entities",
        p(&s.path("entities.json")),
        "--default-quota",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    s.input("a.wcn", "tickets:1\nfor:1\nnoon:1\n\ni:1\nreally:1\napologize:1\n");
    assert!(s.rescore("out", &["--min-span", "2"]).status.success());
    let anns = read_annotations(&s.path("out").join("annotations.jsonl")).unwrap();
    let ids: Vec<_> = anns.iter().map(|a| (a.intent_id.as_str(), a.blanks)).collect();
    assert_eq!(ids, vec![("tickets", 0), ("apology", 1)]);
}
