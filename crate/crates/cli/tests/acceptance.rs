//! Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails or runs over its time budget.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fivew_core::backends::{
    BackendError, Lexicon, MockNli, MockQa, MockQg, NliLabel, NliModel, Paraphraser, QaMode, ReplaySrl,
};
use fivew_core::corpus::{dedup, read_corpus, stats, to_jsonl, write_corpus, ClaimRecord, EntailmentClass, SourceTag};
use fivew_core::fixtures;
use fivew_core::paraphrase::{
    filter_correctness, filter_coverage, run_pipeline, score_diversity, CandidateStatus, ParaphraseConfig,
};
use fivew_core::qagen::{generate_qapairs, QagMode, QagOptions};
use fivew_core::srl5w::{map_role, FiveW, MappingTable, PropBankRole};
use fivew_core::textmetrics::{bleu, lcs_len, med, rouge_l, tokenize, BleuConfig, InvBleuConfig, Normalization, TokenSeq};
use fivew_core::verdict::{evaluate_grid, verify_claim, Condition, QaArm, QagArm, Thresholds, Verdict, VerdictConfig};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 8] = [
        ("metric oracle equivalence", Duration::from_secs(10), metric_oracles),
        ("mapping fidelity", Duration::from_secs(1), mapping_fidelity),
        ("paraphrase pipeline laws", Duration::from_secs(5), paraphrase_laws),
        ("moderna claim end-to-end", Duration::from_secs(1), moderna_end_to_end),
        ("corpus laws", Duration::from_secs(10), corpus_laws),
        ("grid behavior", Duration::from_secs(30), grid_behavior),
        ("threshold monotonicity", Duration::from_secs(30), threshold_monotonicity),
        ("cli determinism", Duration::from_secs(120), cli_determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.0} ms): {detail}", elapsed.as_secs_f64() * 1e3),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.0} ms): {why}", elapsed.as_secs_f64() * 1e3);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn random_words(rng: &mut StdRng, max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| ["a", "b", "c", "d", "e"][rng.random_range(0..5)].to_owned()).collect()
}

fn seq(words: &[String]) -> TokenSeq {
    TokenSeq::from_tokens(words.iter().cloned()).expect("plain words")
}

/// Edit distance by memoized recursion over suffix pairs.
fn med_oracle(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() || b.is_empty() {
            return a.len().max(b.len());
        }
        if let Some(&v) = memo.get(&(a.len(), b.len())) {
            return v;
        }
        let keep = go(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]);
        let v = keep.min(1 + go(&a[1..], b, memo)).min(1 + go(a, &b[1..], memo));
        memo.insert((a.len(), b.len()), v);
        v
    }
    go(a, b, &mut HashMap::new())
}

/// Longest common subsequence by enumerating every subsequence of `a`.
fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    (0u32..1 << a.len())
        .filter(|mask| {
            let mut rest = b.iter();
            (0..a.len()).filter(|i| mask & (1 << i) != 0).all(|i| rest.any(|y| *y == a[i]))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn metric_oracles() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(20240501);
    for _ in 0..1000 {
        let (a, b) = (random_words(&mut rng, 12), random_words(&mut rng, 12));
        let (got, want) = (med(&seq(&a), &seq(&b)), med_oracle(&a, &b));
        ensure!(got == want, "med({a:?}, {b:?}) = {got}, oracle {want}");
    }
    for _ in 0..200 {
        let (a, b) = (random_words(&mut rng, 10), random_words(&mut rng, 10));
        let want = lcs_oracle(&a, &b);
        ensure!(lcs_len(&a, &b) == want, "lcs({a:?}, {b:?}) = {}, oracle {want}", lcs_len(&a, &b));
        if !a.is_empty() && !b.is_empty() {
            let r = rouge_l(&seq(&a), &seq(&b));
            let (p, rec) = (want as f64 / a.len() as f64, want as f64 / b.len() as f64);
            ensure!((r.precision - p).abs() < 1e-12 && (r.recall - rec).abs() < 1e-12, "rouge_l({a:?}, {b:?}) = {r:?}");
        }
    }

    let t = |s: &str| tokenize(s, Normalization::NONE);
    let eps = 0.01f64;
    let geo = |ps: &[f64]| (ps.iter().map(|p| p.ln()).sum::<f64>() / ps.len() as f64).exp();
    let cases: [(&str, &[&str], f64); 5] = [
        // "the" clipped to one of three; no bigram or trigram matches
        ("the the the", &["the cat"], geo(&[1.0 / 3.0, eps, eps])),
        ("the cat sat on the mat", &["the cat sat on the mat"], 1.0),
        // every n-gram matches; brevity penalty exp(1 - 6/3)
        ("the cat sat", &["the cat sat on the mat"], (-1.0f64).exp()),
        ("a b c d", &["a b x d"], geo(&[0.75, 1.0 / 3.0, eps, eps])),
        // closest reference length is 2; clipping takes the max over references
        ("the cat", &["the cat sat on", "the dog"], 1.0),
    ];
    let config = BleuConfig::default();
    for (cand, refs, want) in cases {
        let refs: Vec<TokenSeq> = refs.iter().map(|r| t(r)).collect();
        let got = bleu(&t(cand), &refs, &config).map_err(|e| e.to_string())?;
        ensure!((got - want).abs() < 1e-9, "bleu({cand:?}) = {got}, expected {want}");
    }
    Ok("1000 med pairs, 200 lcs pairs, 5 bleu cases".into())
}

fn mapping_fidelity() -> Result<String, String> {
    let table = MappingTable::default();
    let mapped: BTreeMap<&str, FiveW> =
        PropBankRole::ALL.iter().filter_map(|&r| map_role(r, &table).map(|w| (r.label(), w))).collect();
    let want: BTreeMap<&str, FiveW> = [
        ("ARG0", FiveW::Who),
        ("ARG1", FiveW::What),
        ("ARGM-TMP", FiveW::When),
        ("ARGM-LOC", FiveW::Where),
        ("ARGM-CAU", FiveW::Why),
        ("ARGM-MNR", FiveW::How),
    ]
    .into();
    ensure!(PropBankRole::ALL.len() == 14, "{} roles", PropBankRole::ALL.len());
    ensure!(mapped == want, "{mapped:?}");
    Ok("6 of 14 roles mapped".into())
}

/// Random word-level edits of the claim: deletions, filler insertions and
/// lexicon substitutions, including antonyms.
struct Perturber;

impl Paraphraser for Perturber {
    fn paraphrase(&self, text: &str, n: usize) -> Result<Vec<String>, BackendError> {
        let mut h = DefaultHasher::new();
        text.hash(&mut h);
        let mut rng = StdRng::seed_from_u64(h.finish());
        let swaps: [(&str, &str); 6] = [
            ("opened", "closed"),
            ("praised", "criticized"),
            ("funded", "financed"),
            ("bridge", "crossing"),
            ("visited", "toured"),
            ("harbor", "port"),
        ];
        Ok((0..n)
            .map(|_| {
                let mut words: Vec<String> = text.split_whitespace().map(String::from).collect();
                for _ in 0..rng.random_range(0..=5) {
                    let i = rng.random_range(0..words.len());
                    match rng.random_range(0..4) {
                        0 if words.len() > 2 => {
                            words.remove(i);
                        }
                        1 => words.insert(i, ["reportedly", "really", "apparently"][rng.random_range(0..3)].into()),
                        _ => {
                            for (a, b) in swaps {
                                if words[i] == a {
                                    words[i] = b.into();
                                } else if words[i] == b {
                                    words[i] = a.into();
                                }
                            }
                        }
                    }
                }
                words.join(" ")
            })
            .collect())
    }
}

fn paraphrase_laws() -> Result<String, String> {
    let lexicon = Lexicon::parse(fixtures::SYNTHETIC_LEXICON).map_err(|e| e.to_string())?;
    let nli = MockNli::new(lexicon);
    let config = ParaphraseConfig::default();
    let words = |s: &str| tokenize(s, Normalization::WORDS).tokens().to_vec();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut generated = 0;
    for (i, claim) in fixtures::synthetic_claims(400, 17).iter().enumerate() {
        if generated >= 500 {
            break;
        }
        let text = claim.text();
        let id = format!("c{i}");
        let mut candidates = run_pipeline(&id, &text, &Perturber, &nli, &config).map_err(|e| e.to_string())?;
        generated += candidates.len();
        for c in &candidates {
            let distance = med_oracle(&words(&text), &words(&c.text));
            ensure!(c.med_to_claim == distance, "{:?}: med {} vs oracle {distance}", c.text, c.med_to_claim);
            let covered = distance > config.med_threshold;
            ensure!(covered == (c.status != CandidateStatus::DroppedCoverage), "coverage status of {c:?}");
            if covered {
                let label = nli.classify(&text, &c.text).map_err(|e| e.to_string())?.label;
                ensure!(c.nli_label == Some(label), "nli label of {c:?}");
                ensure!((label == NliLabel::Entailment) == (c.status == CandidateStatus::Kept), "correctness status of {c:?}");
            }
            ensure!(c.diversity_d.is_some() == (c.status == CandidateStatus::Kept), "diversity of {c:?}");
            *counts
                .entry(match c.status {
                    CandidateStatus::Kept => "kept",
                    CandidateStatus::DroppedCoverage => "coverage",
                    CandidateStatus::DroppedCorrectness => "correctness",
                })
                .or_default() += 1;
        }
        let before = candidates.clone();
        filter_coverage(&mut candidates, config.med_threshold);
        filter_correctness(&mut candidates, &text, &nli, false).map_err(|e| e.to_string())?;
        score_diversity(&text, &mut candidates, &InvBleuConfig::default()).map_err(|e| e.to_string())?;
        ensure!(candidates == before, "re-running filters changed candidates of {id}");
    }
    ensure!(generated >= 500, "only {generated} candidates");
    ensure!(counts.len() == 3, "not every status occurs: {counts:?}");
    Ok(format!("{generated} candidates {counts:?}"))
}

fn moderna_end_to_end() -> Result<String, String> {
    let mut record = fixtures::moderna_record();
    let generation = generate_qapairs(&record, &fixtures::moderna_frames(), &MappingTable::default(), QagMode::Template, QagOptions::default())
        .map_err(|e| e.to_string())?;
    let pairs = generation.pairs;
    ensure!(!pairs.is_empty() && pairs.len() <= 10, "{} pairs", pairs.len());
    for w in [FiveW::Who, FiveW::What, FiveW::When] {
        ensure!(pairs.iter().any(|p| p.w == w), "no {w} pair");
    }
    for w in [FiveW::Where, FiveW::Why] {
        ensure!(pairs.iter().all(|p| p.w != w), "unexpected {w} pair");
    }
    record.qa_pairs = pairs;
    let report = verify_claim(&record, &record.qa_pairs, &fixtures::moderna_scripted_qa(), &VerdictConfig::default());
    let want = BTreeMap::from([
        (FiveW::Who, Verdict::Supported),
        (FiveW::What, Verdict::Refuted),
        (FiveW::When, Verdict::Refuted),
        (FiveW::Where, Verdict::NotVerifiable),
        (FiveW::Why, Verdict::NotVerifiable),
    ]);
    ensure!(report.pattern() == want, "{:?}", report.pattern());
    Ok(format!("{} pairs, pattern matches", record.qa_pairs.len()))
}

fn vary_case(rng: &mut StdRng, claim: &str) -> String {
    claim
        .split_whitespace()
        .map(|w| if rng.random_bool(0.5) { w.to_uppercase() } else { w.to_lowercase() })
        .collect::<Vec<_>>()
        .join(if rng.random_bool(0.5) { "  " } else { " \t " })
}

fn corpus_laws() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(64);
    let base = fixtures::synthetic_claims(150, 3);
    let mut records: Vec<ClaimRecord> = base
        .iter()
        .enumerate()
        .map(|(i, c)| ClaimRecord::new(format!("r{i}"), SourceTag::Other, c.text(), EntailmentClass::ALL[i % 3]))
        .collect();
    for j in 0..50 {
        let original = &base[rng.random_range(0..base.len())];
        let claim = vary_case(&mut rng, &original.text());
        records.push(ClaimRecord::new(format!("d{j}"), SourceTag::Vitc, claim, EntailmentClass::Support));
    }
    records.shuffle(&mut rng);
    let (once, dropped) = dedup(records);
    ensure!(dropped == 50, "dropped {dropped} of 50 injected duplicates");
    let (twice, again) = dedup(once.clone());
    ensure!(again == 0 && twice == once, "dedup is not idempotent");

    let (fever, vitc) = fixtures::overlap_fixture();
    let (_, overlap) = dedup(fever.into_iter().chain(vitc).collect());
    ensure!(overlap == 64, "overlap fixture dropped {overlap}");

    let mut corpus = fixtures::scaled_class_corpus();
    let (synthetic, _) = fixtures::synthetic_corpus(30, 5);
    corpus.extend(synthetic);
    corpus.push(fixtures::moderna_record());
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (first, second) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    write_corpus(&corpus, &first).map_err(|e| e.to_string())?;
    let back = read_corpus(&first).map_err(|e| e.to_string())?;
    write_corpus(&back, &second).map_err(|e| e.to_string())?;
    ensure!(std::fs::read(&first).ok() == std::fs::read(&second).ok(), "write/read/write differs");

    let s = stats(&fixtures::scaled_class_corpus());
    for (class, [claims, paraphrases, qa_pairs, docs]) in fixtures::SCALED_CLASS_COUNTS {
        let c = s.per_class[&class];
        ensure!(
            [c.claims, c.paraphrases, c.qa_pairs, c.evidence_docs] == [claims, paraphrases, qa_pairs, docs],
            "{class} row {c:?}"
        );
    }
    let column = |f: fn(&fivew_core::corpus::ClassCounts) -> usize| s.per_class.values().map(f).sum::<usize>();
    ensure!(
        [s.totals.claims, s.totals.paraphrases, s.totals.qa_pairs, s.totals.evidence_docs]
            == [column(|c| c.claims), column(|c| c.paraphrases), column(|c| c.qa_pairs), column(|c| c.evidence_docs)],
        "totals {:?}",
        s.totals
    );
    Ok(format!("{} records round-tripped, totals {:?}", corpus.len(), s.totals))
}

fn grid_behavior() -> Result<String, String> {
    let (records, frames) = fixtures::grid_fixture(20, 21);
    let labeler = ReplaySrl::new(frames.into_values().flatten().collect());
    let qags = [QagArm { name: "template".into(), generator: None }, QagArm { name: "echo".into(), generator: Some(Arc::new(MockQg)) }];
    let qas = [
        QaArm { name: "exact".into(), backend: Arc::new(MockQa::new(QaMode::Extractive)) },
        QaArm { name: "worse".into(), backend: Arc::new(MockQa::new(QaMode::Sentence)) },
    ];
    let cells = evaluate_grid(
        &records,
        &labeler,
        &MappingTable::default(),
        &qags,
        &qas,
        &[Condition::ClaimOnly, Condition::PlusParaphrase],
        QagOptions::default(),
        &VerdictConfig::default(),
    );
    ensure!(cells.len() == 8, "{} cells", cells.len());
    for cell in &cells {
        ensure!(cell.complete && cell.pairs > 0, "{cell:?}");
        if cell.qa_model == "exact" {
            ensure!([cell.bleu, cell.rouge_l, cell.recall, cell.f1] == [1.0; 4], "{cell:?}");
            let worse = cells
                .iter()
                .find(|c| c.qa_model == "worse" && c.qag_model == cell.qag_model && c.condition == cell.condition)
                .ok_or("missing worse cell")?;
            ensure!(worse.f1 < cell.f1, "worse {} vs exact {}", worse.f1, cell.f1);
        }
    }
    let worst = cells.iter().filter(|c| c.qa_model == "worse").map(|c| c.f1).fold(0.0, f64::max);
    Ok(format!("8 cells; exact all 1.0, worse f1 at most {worst:.4}"))
}

fn threshold_monotonicity() -> Result<String, String> {
    let (records, _) = fixtures::synthetic_corpus(50, 11);
    let qa = MockQa::new(QaMode::Sentence);
    let counts: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|&tau| {
            let config = VerdictConfig { thresholds: Thresholds { tau_support: tau, ..Thresholds::default() }, ..VerdictConfig::default() };
            records.iter().map(|r| verify_claim(r, &r.qa_pairs, &qa, &config).summary.supported).sum()
        })
        .collect();
    ensure!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    ensure!(counts[0] > counts[4], "sweep is flat: {counts:?}");
    Ok(format!("supported counts {counts:?}"))
}

fn write_inputs(dir: &Path) -> std::io::Result<()> {
    let w = |name: &str, content: &str| std::fs::write(dir.join(name), content);
    let (fever, vitc) = fixtures::overlap_fixture();
    w("fever.jsonl", &fixtures::to_source_jsonl(&fever))?;
    w("vitc.jsonl", &fixtures::to_source_jsonl(&vitc))?;
    let (grid, frames) = fixtures::grid_fixture(10, 2);
    w("grid.jsonl", &to_jsonl(&grid))?;
    w("grid.frames.jsonl", &fixtures::frame_file(&frames))?;
    let (synthetic, _) = fixtures::synthetic_corpus(20, 9);
    w("synthetic.jsonl", &to_jsonl(&synthetic))?;
    let mut moderna = fixtures::moderna_record();
    moderna.qa_pairs.clear();
    w("moderna.jsonl", &to_jsonl(&[moderna]))?;
    w("moderna.frames.jsonl", &fixtures::moderna_frame_file())?;
    w("lexicon.tsv", fixtures::SYNTHETIC_LEXICON)?;
    w(
        "run.toml",
        "seed = 5\n\n\
         [[backends]]\nrole = \"paraphrase\"\nkind = \"mock\"\nmodel_id = \"lex\"\nbehavior = \"lexicon\"\nfixture = \"lexicon.tsv\"\n\n\
         [[backends]]\nrole = \"nli\"\nkind = \"mock\"\nmodel_id = \"nli\"\nbehavior = \"lexicon\"\nfixture = \"lexicon.tsv\"\n\n\
         [[backends]]\nrole = \"srl\"\nkind = \"mock\"\nmodel_id = \"frames\"\nbehavior = \"replay\"\nfixture = \"grid.frames.jsonl\"\n\n\
         [[backends]]\nrole = \"qg\"\nkind = \"mock\"\nmodel_id = \"echo\"\nbehavior = \"echo\"\n",
    )
}

const RUNS: [&[&str]; 5] = [
    &["build-corpus", "--in", "fever.jsonl", "--in", "vitc.jsonl", "--adapter", "fever", "--adapter", "vitc", "--out", "built.jsonl", "--split", "0.7,0.2,0.1"],
    &["paraphrase-eval", "--corpus", "synthetic.jsonl", "--models", "lex,mock", "--report", "para.jsonl"],
    &["qagen", "--corpus", "moderna.jsonl", "--frames", "moderna.frames.jsonl", "--mode", "generative", "--strict", "--out", "moderna.out.jsonl"],
    &["validate", "--corpus", "synthetic.jsonl", "--qa-backend", "mock:sentence", "--report", "verdicts.jsonl", "--sweep", "0.1,0.5,0.9"],
    &["eval-grid", "--corpus", "grid.jsonl", "--qag", "template,echo", "--qa", "mock:extractive,mock:sentence", "--conditions", "claim,plus-paraphrase", "--report", "grid.report.jsonl"],
];

fn run_all(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    write_inputs(dir).map_err(|e| e.to_string())?;
    let inputs: Vec<String> = std::fs::read_dir(dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    let mut outputs = BTreeMap::new();
    for args in RUNS {
        let out = Command::new(env!("CARGO_BIN_EXE_fivew"))
            .args(args)
            .env("FIVEW_CONFIG", "run.toml")
            .current_dir(dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr));
        outputs.insert(format!("stdout of {}", args[0]), out.stdout);
    }
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name().to_string_lossy().into_owned();
        if !inputs.contains(&name) {
            outputs.insert(name.clone(), std::fs::read(dir.join(&name)).map_err(|e| e.to_string())?);
        }
    }
    Ok(outputs)
}

fn cli_determinism() -> Result<String, String> {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let first = run_all(a.path())?;
    let second = run_all(b.path())?;
    ensure!(first.keys().eq(second.keys()), "different outputs: {:?} vs {:?}", first.keys(), second.keys());
    for (name, bytes) in &first {
        ensure!(second[name] == *bytes, "{name} differs between runs");
        ensure!(!bytes.is_empty() || name.ends_with(".tsv"), "{name} is empty");
    }
    let files = first.keys().filter(|k| !k.starts_with("stdout")).count();
    Ok(format!("5 subcommands, {files} report files identical"))
}
