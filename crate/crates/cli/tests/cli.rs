use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use fivew_core::corpus::{read_corpus, to_jsonl};
use fivew_core::fixtures;
use fivew_core::paraphrase::ParaphraseModelReport;
use fivew_core::srl5w::FiveW;
use fivew_core::verdict::{ClaimVerdictReport, EvalGridCell, Verdict};
use tempfile::TempDir;

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Work { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, content).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_fivew"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("FIVEW_CONFIG")
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn code(&self, args: &[&str]) -> i32 {
        self.run(args).status.code().unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }
}

fn lines<T: serde::de::DeserializeOwned>(text: &str) -> Vec<T> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// The Moderna claim without QA pairs, plus its frames and the QA script.
fn moderna_inputs(w: &Work) {
    let mut record = fixtures::moderna_record();
    record.qa_pairs.clear();
    w.write("moderna.jsonl", &to_jsonl(&[record]));
    w.write("moderna.frames.jsonl", &fixtures::moderna_frame_file());
    w.write("moderna.qa.jsonl", &fixtures::moderna_qa_script_jsonl());
}

#[test]
fn build_corpus_merges_and_drops_duplicates() {
    let w = Work::new();
    let (fever, vitc) = fixtures::overlap_fixture();
    w.write("fever.jsonl", &fixtures::to_source_jsonl(&fever));
    w.write("vitc.jsonl", &fixtures::to_source_jsonl(&vitc));
    let stdout = w.ok(&[
        "build-corpus", "--in", "fever.jsonl", "--in", "vitc.jsonl", "--adapter", "fever", "--adapter", "vitc", "--out",
        "merged.jsonl", "--split", "0.8,0.1,0.1", "--seed", "3",
    ]);
    assert!(stdout.contains("duplicates dropped: 64"), "{stdout}");
    assert!(stdout.contains("total"));
    let merged = read_corpus(&w.path("merged.jsonl")).unwrap();
    assert_eq!(merged.len(), 116);
    let parts: usize = ["train", "dev", "test"]
        .iter()
        .map(|b| read_corpus(&w.path(&format!("merged.{b}.jsonl"))).unwrap().len())
        .sum();
    assert_eq!(parts, 116);
    let stats: serde_json::Value = serde_json::from_str(&w.read("merged.stats.json")).unwrap();
    assert_eq!(stats["duplicates_dropped"], 64);
    assert_eq!(stats["stats"]["totals"]["claims"], 116);
}

#[test]
fn build_corpus_input_errors_exit_2() {
    let w = Work::new();
    w.write("a.jsonl", "{\"claim\": \"x y z\", \"label\": \"SUPPORTS\"}\n");
    assert_eq!(w.code(&["build-corpus", "--in", "a.jsonl", "--adapter", "nope", "--out", "o.jsonl"]), 2);
    assert!(!w.path("o.jsonl").exists());
    assert_eq!(w.code(&["build-corpus", "--in", "missing.jsonl", "--adapter", "fever", "--out", "o.jsonl"]), 2);
    w.write("csv.txt", "claim,label\nx,y\n");
    assert_eq!(w.code(&["build-corpus", "--in", "csv.txt", "--adapter", "fever", "--out", "o.jsonl"]), 2);
    assert_eq!(w.code(&["build-corpus", "--in", "a.jsonl", "--adapter", "fever", "--out", "a.jsonl"]), 2);
    assert_eq!(w.read("a.jsonl"), "{\"claim\": \"x y z\", \"label\": \"SUPPORTS\"}\n");
    assert_eq!(w.code(&["build-corpus", "--adapter", "fever", "--out", "o.jsonl"]), 2);
}

#[test]
fn moderna_through_qagen_and_validate() {
    let w = Work::new();
    moderna_inputs(&w);
    let stdout = w.ok(&["qagen", "--corpus", "moderna.jsonl", "--frames", "moderna.frames.jsonl", "--mode", "template", "--out", "moderna.qa-pairs.jsonl"]);
    assert!(stdout.contains("records with frames: 1 of 1"), "{stdout}");
    let records = read_corpus(&w.path("moderna.qa-pairs.jsonl")).unwrap();
    let pairs = &records[0].qa_pairs;
    assert!(!pairs.is_empty() && pairs.len() <= 10);
    for present in [FiveW::Who, FiveW::What, FiveW::When] {
        assert!(pairs.iter().any(|p| p.w == present));
    }
    assert!(pairs.iter().all(|p| p.w != FiveW::Where && p.w != FiveW::Why));

    w.ok(&["validate", "--corpus", "moderna.qa-pairs.jsonl", "--qa-backend", "mock:replay=moderna.qa.jsonl", "--report", "v.jsonl"]);
    let reports: Vec<ClaimVerdictReport> = lines(&w.read("v.jsonl"));
    assert_eq!(reports[0].pattern(), fixtures::moderna_expected_pattern());
}

#[test]
fn qagen_without_frames_leaves_corpus_unchanged() {
    let w = Work::new();
    let (records, _) = fixtures::synthetic_corpus(5, 1);
    let original = to_jsonl(&records);
    w.write("c.jsonl", &original);
    w.write("empty.frames", "");
    w.ok(&["qagen", "--corpus", "c.jsonl", "--frames", "empty.frames", "--mode", "template", "--out", "out.jsonl"]);
    assert_eq!(w.read("out.jsonl"), original);
    assert_eq!(w.read("c.jsonl"), original);
}

#[test]
fn generative_qagen_needs_a_backend_when_strict() {
    let w = Work::new();
    moderna_inputs(&w);
    let args = ["qagen", "--corpus", "moderna.jsonl", "--frames", "moderna.frames.jsonl", "--mode", "generative", "--out", "g.jsonl"];
    assert_eq!(w.code(&[&args[..], &["--strict"]].concat()), 2);
    assert!(!w.path("g.jsonl").exists());
    // without --strict the templates stand in
    w.ok(&args);
    let templated = read_corpus(&w.path("g.jsonl")).unwrap();
    assert!(!templated[0].qa_pairs.is_empty());

    w.write("qg.toml", "[[backends]]\nrole = \"qg\"\nkind = \"mock\"\nmodel_id = \"echo\"\nbehavior = \"echo\"\n");
    w.ok(&[&args[..], &["--strict", "--config", "qg.toml"]].concat());
    let generated = read_corpus(&w.path("g.jsonl")).unwrap();
    assert_eq!(generated[0].qa_pairs.len(), templated[0].qa_pairs.len());
    assert!(generated[0].qa_pairs.iter().all(|p| p.source == fivew_core::qagen::QaSource::Generative));
}

#[test]
fn validate_without_evidence_is_not_verifiable() {
    let w = Work::new();
    let (mut records, _) = fixtures::synthetic_corpus(6, 4);
    for r in &mut records {
        r.evidence.clear();
    }
    w.write("c.jsonl", &to_jsonl(&records));
    w.ok(&["validate", "--corpus", "c.jsonl", "--qa-backend", "mock:extractive", "--report", "v.jsonl"]);
    let reports: Vec<ClaimVerdictReport> = lines(&w.read("v.jsonl"));
    assert_eq!(reports.len(), 6);
    assert!(reports.iter().flat_map(|r| &r.aspects).all(|a| a.verdict == Verdict::NotVerifiable));
}

#[test]
fn validate_threshold_flags() {
    let w = Work::new();
    let (records, _) = fixtures::synthetic_corpus(20, 8);
    w.write("c.jsonl", &to_jsonl(&records));
    w.ok(&[
        "validate", "--corpus", "c.jsonl", "--qa-backend", "mock:sentence", "--report", "v.jsonl", "--sweep",
        "0.1,0.3,0.5,0.7,0.9",
    ]);
    let sweep = w.read("v.sweep.tsv");
    let supported: Vec<usize> = sweep.lines().skip(1).map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(supported.len(), 5);
    assert!(supported.windows(2).all(|p| p[0] >= p[1]), "{sweep}");

    // the sweep row at the default tau agrees with the main report
    let reports: Vec<ClaimVerdictReport> = lines(&w.read("v.jsonl"));
    assert_eq!(supported[2], reports.iter().map(|r| r.summary.supported).sum::<usize>());

    w.ok(&["validate", "--corpus", "c.jsonl", "--qa-backend", "mock:sentence", "--report", "strict.jsonl", "--thresholds", "tau_support=0.9"]);
    let strict: Vec<ClaimVerdictReport> = lines(&w.read("strict.jsonl"));
    assert_eq!(supported[4], strict.iter().map(|r| r.summary.supported).sum::<usize>());

    let bad = ["validate", "--corpus", "c.jsonl", "--qa-backend", "mock:sentence", "--report", "x.jsonl", "--thresholds"];
    assert_eq!(w.code(&[&bad[..], &["tau_support=2"]].concat()), 2);
    assert_eq!(w.code(&[&bad[..], &["speed=1"]].concat()), 2);
    assert_eq!(w.code(&["validate", "--corpus", "c.jsonl", "--qa-backend", "bert", "--report", "x.jsonl"]), 2);
}

#[test]
fn paraphrase_eval_reports_and_series() {
    let w = Work::new();
    let (records, _) = fixtures::synthetic_corpus(10, 2);
    w.write("c.jsonl", &to_jsonl(&records));
    w.write("lexicon.tsv", fixtures::SYNTHETIC_LEXICON);
    w.write(
        "run.toml",
        "[paraphrase]\nn = 5\n\n\
         [[backends]]\nrole = \"paraphrase\"\nkind = \"mock\"\nmodel_id = \"lex\"\nbehavior = \"lexicon\"\nfixture = \"lexicon.tsv\"\n\n\
         [[backends]]\nrole = \"nli\"\nkind = \"mock\"\nmodel_id = \"nli\"\nbehavior = \"lexicon\"\nfixture = \"lexicon.tsv\"\n",
    );
    let stdout = w.ok(&["paraphrase-eval", "--corpus", "c.jsonl", "--models", "lex,mock", "--config", "run.toml", "--report", "p.jsonl"]);
    assert!(stdout.contains("lex"), "{stdout}");
    let reports: Vec<ParaphraseModelReport> = lines(&w.read("p.jsonl"));
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0].model_id, "lex");
    for r in &reports {
        assert_eq!(r.claims, 10);
        assert_eq!(r.per_index_diversity.len(), 5);
        assert!((0.0..=1.0).contains(&r.correctness_fraction));
    }
    assert!(reports[0].kept > 0);
    let series = w.read("p.lex.diversity.tsv");
    assert!(series.lines().all(|l| l.split('\t').count() == 2));
    let candidates = w.read("p.lex.candidates.jsonl");
    assert_eq!(candidates.lines().count(), reports[0].generated);

    assert_eq!(
        w.code(&["paraphrase-eval", "--corpus", "c.jsonl", "--models", "gpt3", "--config", "run.toml", "--report", "q.jsonl"]),
        2
    );
    assert!(!w.path("q.jsonl").exists());
}

fn grid_inputs(w: &Work, n: usize) {
    let (records, frames) = fixtures::grid_fixture(n, 6);
    w.write("g.jsonl", &to_jsonl(&records));
    w.write("g.frames.jsonl", &fixtures::frame_file(&frames));
    w.write(
        "grid.toml",
        "[[backends]]\nrole = \"srl\"\nkind = \"mock\"\nmodel_id = \"frames\"\nbehavior = \"replay\"\nfixture = \"g.frames.jsonl\"\n\n\
         [[backends]]\nrole = \"qa\"\nkind = \"mock\"\nmodel_id = \"exact\"\nbehavior = \"extractive\"\n",
    );
}

#[test]
fn eval_grid_cells() {
    let w = Work::new();
    grid_inputs(&w, 6);
    w.ok(&["--config", "grid.toml", "eval-grid", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact", "--report", "one.jsonl"]);
    let one: Vec<EvalGridCell> = lines(&w.read("one.jsonl"));
    assert_eq!(one.len(), 1);
    assert_eq!((one[0].bleu, one[0].rouge_l, one[0].recall, one[0].f1), (1.0, 1.0, 1.0, 1.0));

    let stdout = w.ok(&[
        "eval-grid", "--config", "grid.toml", "--corpus", "g.jsonl", "--qag", "template,mock:echo", "--qa", "exact,mock:sentence",
        "--conditions", "claim,plus-paraphrase", "--report", "grid.jsonl",
    ]);
    assert!(stdout.contains("plus-paraphrase"));
    let cells: Vec<EvalGridCell> = lines(&w.read("grid.jsonl"));
    assert_eq!(cells.len(), 8);
    assert!(cells.iter().all(|c| c.complete));

    assert_eq!(w.code(&["eval-grid", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact", "--report", "x.jsonl"]), 2);
    assert_eq!(
        w.code(&["eval-grid", "--config", "grid.toml", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact", "--conditions", "evidence", "--report", "x.jsonl"]),
        2
    );
}

#[test]
fn config_comes_from_the_environment() {
    let w = Work::new();
    grid_inputs(&w, 3);
    let out = Command::new(env!("CARGO_BIN_EXE_fivew"))
        .args(["eval-grid", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact", "--report", "env.jsonl"])
        .current_dir(w.dir.path())
        .env("FIVEW_CONFIG", w.path("grid.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(w.code(&["--config", "absent.toml", "eval-grid", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact", "--report", "x.jsonl"]), 2);
}

#[test]
fn jobs_do_not_change_reports() {
    let w = Work::new();
    grid_inputs(&w, 8);
    let args = |jobs: &str, report: &str| -> Vec<String> {
        ["--jobs", jobs, "--config", "grid.toml", "eval-grid", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact,mock:sentence", "--conditions", "claim,plus-paraphrase", "--report", report]
            .map(String::from)
            .to_vec()
    };
    let run = |a: Vec<String>| w.ok(&a.iter().map(String::as_str).collect::<Vec<_>>());
    run(args("1", "a.jsonl"));
    run(args("4", "b.jsonl"));
    assert_eq!(w.read("a.jsonl"), w.read("b.jsonl"));
    assert_eq!(w.code(&["--jobs", "0", "eval-grid", "--corpus", "g.jsonl", "--qag", "template", "--qa", "exact", "--report", "x.jsonl"]), 2);
}
