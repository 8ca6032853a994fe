use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use fivew_core::backends::{
    build_labeler, build_nli, build_paraphraser, build_qa, build_qg, BackendDescriptor, BackendRole, Paraphraser,
};
use fivew_core::config::RunConfig;
use fivew_core::corpus::{
    check_unique_ids, dedup, ingest_source, read_corpus, split, stats, to_jsonl, Adapter, ClaimRecord, CorpusStats,
};
use fivew_core::paraphrase::{compare_models, diversity_series};
use fivew_core::qagen::{generate_qapairs, QagMode, QagOptions};
use fivew_core::srl5w::{group_by_claim, parse_frames, FiveW, MappingTable};
use fivew_core::verdict::{evaluate_grid, verify_claim, Condition, QaArm, QagArm, VerdictCounts};
use rayon::prelude::*;
use serde::Serialize;

use crate::{input, BuildCorpusArgs, CliError, EvalGridArgs, ParaphraseEvalArgs, QagModeArg, QagenArgs, ValidateArgs};

type Result<T> = std::result::Result<T, CliError>;

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => RunConfig::load(p).map_err(|e| input(e.to_string())),
    }
}

fn mapping_table(config: &RunConfig) -> Result<MappingTable> {
    let mut table = MappingTable::default();
    if let Some(path) = &config.paths.mapping {
        let content =
            std::fs::read_to_string(path).map_err(|e| input(format!("mapping file {}: {e}", path.display())))?;
        table.apply_overrides(&content).map_err(|e| input(format!("mapping file {}: {e}", path.display())))?;
    }
    Ok(table)
}

fn options(config: &RunConfig) -> QagOptions {
    QagOptions { include_how: config.include_how }
}

fn load_corpus(path: &Path) -> Result<Vec<ClaimRecord>> {
    read_corpus(path).map_err(|e| input(format!("corpus {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Refuses to write over any of the command's inputs.
fn guard_outputs(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    let canon = |p: &Path| std::fs::canonicalize(p).ok();
    for out in outputs {
        let Some(out_c) = canon(out) else { continue };
        if inputs.iter().any(|i| canon(i).as_ref() == Some(&out_c)) {
            return Err(input(format!("{} is also an input; refusing to overwrite it", out.display())));
        }
    }
    Ok(())
}

/// `dir/stem.suffix` next to `path`, where `stem` is its file stem.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn file_slug(model_id: &str) -> String {
    model_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn resolve(config: &RunConfig, role: BackendRole, reference: &str) -> Result<BackendDescriptor> {
    config.resolve_backend(role, reference).map_err(|e| input(e.to_string()))
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

#[derive(Serialize)]
struct InputSummary {
    path: String,
    adapter: String,
    records: usize,
    rejected: usize,
}

#[derive(Serialize)]
struct SplitSizes {
    train: usize,
    dev: usize,
    test: usize,
    rest: usize,
}

#[derive(Serialize)]
struct BuildReport {
    inputs: Vec<InputSummary>,
    duplicates_dropped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    split: Option<SplitSizes>,
    stats: CorpusStats,
}

pub fn build_corpus(args: &BuildCorpusArgs, config: &RunConfig) -> Result<()> {
    let adapters: Vec<Adapter> =
        args.adapters.iter().map(|a| a.parse::<Adapter>().map_err(|e| input(e.to_string()))).collect::<Result<_>>()?;
    let adapters = match adapters.len() {
        1 => vec![adapters[0]; args.inputs.len()],
        n if n == args.inputs.len() => adapters,
        n => return Err(input(format!("{n} adapters for {} inputs; give one, or one per input", args.inputs.len()))),
    };
    let stats_path = sibling(&args.out, "stats.json");
    let fractions = match args.split.as_deref() {
        None => None,
        Some(&[a, b, c]) => Some([a, b, c]),
        Some(_) => return Err(input("--split takes three fractions: train,dev,test")),
    };
    let split_paths: Vec<PathBuf> = ["train", "dev", "test", "rest"].iter().map(|b| sibling(&args.out, &format!("{b}.jsonl"))).collect();
    let inputs: Vec<&Path> = args.inputs.iter().map(PathBuf::as_path).collect();
    let mut outputs = vec![args.out.as_path(), stats_path.as_path()];
    if fractions.is_some() {
        outputs.extend(split_paths.iter().map(PathBuf::as_path));
    }
    guard_outputs(&inputs, &outputs)?;

    let mut records = Vec::new();
    let mut summaries = Vec::new();
    let mut diagnostics = Vec::new();
    for ((path, adapter), tag) in args.inputs.iter().zip(&adapters).zip(&args.adapters) {
        let tag = if args.adapters.len() == 1 { &args.adapters[0] } else { tag };
        match ingest_source(path, *adapter) {
            Ok(ingested) => {
                for r in &ingested.rejected {
                    log::warn!("{}:{}: skipped: {}", path.display(), r.line, r.reason);
                }
                summaries.push(InputSummary {
                    path: path.display().to_string(),
                    adapter: tag.clone(),
                    records: ingested.records.len(),
                    rejected: ingested.rejected.len(),
                });
                records.extend(ingested.records);
            }
            Err(e) => diagnostics.push(format!("{}: {e}", path.display())),
        }
    }
    if !diagnostics.is_empty() {
        return Err(input(diagnostics.join("\n")));
    }

    let (records, duplicates_dropped) = dedup(records);
    check_unique_ids(&records).map_err(|e| input(e.to_string()))?;
    write_file(&args.out, &to_jsonl(&records))?;

    let split_sizes = match fractions {
        None => None,
        Some(fractions) => {
            let seed = args.seed.unwrap_or(config.seed);
            let parts = split(records.clone(), fractions, seed).map_err(|e| input(e.to_string()))?;
            let buckets = [&parts.train, &parts.dev, &parts.test, &parts.rest];
            for (bucket, path) in buckets.iter().zip(&split_paths) {
                if !bucket.is_empty() || path != &split_paths[3] {
                    write_file(path, &to_jsonl(bucket))?;
                }
            }
            Some(SplitSizes { train: parts.train.len(), dev: parts.dev.len(), test: parts.test.len(), rest: parts.rest.len() })
        }
    };

    let report = BuildReport { inputs: summaries, duplicates_dropped, split: split_sizes, stats: stats(&records) };
    write_file(&stats_path, &(serde_json::to_string_pretty(&report).context("serializing stats")? + "\n"))?;

    print!("{}", report.stats);
    println!("duplicates dropped: {duplicates_dropped}");
    if let Some(s) = &report.split {
        println!("split: train {} / dev {} / test {} / rest {}", s.train, s.dev, s.test, s.rest);
    }
    Ok(())
}

pub fn paraphrase_eval(args: &ParaphraseEvalArgs, config: &RunConfig) -> Result<()> {
    let mut models: Vec<(String, Arc<dyn Paraphraser>)> = Vec::new();
    for reference in &args.models {
        let d = resolve(config, BackendRole::Paraphrase, reference)?;
        let backend = build_paraphraser(&d).map_err(|e| input(format!("paraphrase backend {reference:?}: {e}")))?;
        models.push((reference.clone(), backend));
    }
    let nli_descriptor = match config.first_backend(BackendRole::Nli) {
        Some(d) => d.clone(),
        None => BackendDescriptor::parse_compact(BackendRole::Nli, "mock").map_err(|e| CliError::Internal(e.into()))?,
    };
    let nli = build_nli(&nli_descriptor).map_err(|e| input(format!("nli backend: {e}")))?;

    let report_files: Vec<(PathBuf, PathBuf)> = models
        .iter()
        .map(|(id, _)| {
            let slug = file_slug(id);
            (sibling(&args.report, &format!("{slug}.diversity.tsv")), sibling(&args.report, &format!("{slug}.candidates.jsonl")))
        })
        .collect();
    let mut outputs = vec![args.report.as_path()];
    for (a, b) in &report_files {
        outputs.push(a);
        outputs.push(b);
    }
    guard_outputs(&[args.corpus.as_path()], &outputs)?;

    let records = load_corpus(&args.corpus)?;
    let claims: Vec<(String, String)> = records.iter().map(|r| (r.id.clone(), r.claim.clone())).collect();
    let borrowed: Vec<(String, &dyn Paraphraser)> = models.iter().map(|(id, m)| (id.clone(), m.as_ref())).collect();
    let runs = compare_models(&claims, &borrowed, nli.as_ref(), &config.paraphrase_config());

    let reports: Vec<_> = runs.iter().map(|r| r.report.clone()).collect();
    write_file(&args.report, &to_jsonl(&reports))?;
    for (run, (series, candidates)) in runs.iter().zip(&report_files) {
        write_file(series, &diversity_series(&run.report))?;
        write_file(candidates, &to_jsonl(&run.candidates))?;
    }

    println!("{:<24} {:>7} {:>10} {:>12} {:>12} {:>10}", "model", "claims", "coverage", "coverage%", "correct%", "diversity");
    for r in &reports {
        let diversity = r.diversity_mean.map_or_else(|| "-".to_owned(), |d| format!("{d:.2}"));
        println!(
            "{:<24} {:>7} {:>10.2} {:>12} {:>12} {:>10}",
            r.model_id,
            r.claims,
            r.coverage_mean_kept,
            pct(r.coverage_pass_fraction),
            pct(r.correctness_fraction),
            diversity
        );
        for e in &r.errors {
            log::warn!("{}: {e}", r.model_id);
        }
    }
    Ok(())
}

pub fn qagen(args: &QagenArgs, config: &RunConfig) -> Result<()> {
    let table = mapping_table(config)?;
    let qg = match args.mode {
        QagModeArg::Template => None,
        QagModeArg::Generative => match config.first_backend(BackendRole::Qg) {
            Some(d) => Some(build_qg(d).map_err(|e| input(format!("qg backend: {e}")))?),
            None if args.strict => {
                return Err(input("generative mode needs a qg backend in the configuration"));
            }
            None => {
                log::warn!("no qg backend configured; using templates");
                None
            }
        },
    };
    let mode = match &qg {
        None => QagMode::Template,
        Some(backend) => QagMode::Generative { backend: backend.as_ref(), strict: args.strict },
    };
    guard_outputs(&[args.corpus.as_path(), args.frames.as_path()], &[args.out.as_path()])?;

    let mut records = load_corpus(&args.corpus)?;
    let frame_text =
        std::fs::read_to_string(&args.frames).map_err(|e| input(format!("frames {}: {e}", args.frames.display())))?;
    let frames = group_by_claim(parse_frames(&frame_text).map_err(|e| input(format!("frames {}: {e}", args.frames.display())))?);
    for id in frames.keys() {
        if !records.iter().any(|r| &r.id == id) {
            log::warn!("frames for unknown claim {id:?} ignored");
        }
    }

    let opts = options(config);
    let results: Vec<_> = records
        .par_iter()
        .map(|r| frames.get(&r.id).map(|f| generate_qapairs(r, f, &table, mode, opts)))
        .collect();
    let mut failures = Vec::new();
    let mut per_w: BTreeMap<FiveW, usize> = BTreeMap::new();
    let mut touched = 0;
    for (record, result) in records.iter_mut().zip(results) {
        match result {
            None => {}
            Some(Ok(generation)) => {
                for w in &generation.warnings {
                    log::warn!("{}: {w}", record.id);
                }
                for p in &generation.pairs {
                    *per_w.entry(p.w).or_default() += 1;
                }
                record.qa_pairs = generation.pairs;
                touched += 1;
            }
            Some(Err(e)) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        return Err(CliError::Internal(anyhow::anyhow!("question generation failed:\n{}", failures.join("\n"))));
    }
    write_file(&args.out, &to_jsonl(&records))?;

    println!("records with frames: {touched} of {}", records.len());
    for w in FiveW::ALL {
        if w != FiveW::How || opts.include_how {
            println!("{:<6} {:>8}", w.to_string(), per_w.get(&w).copied().unwrap_or(0));
        }
    }
    Ok(())
}

fn parse_threshold_overrides(config: &RunConfig, overrides: &[String]) -> Result<fivew_core::config::ThresholdConfig> {
    let mut t = config.thresholds;
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| input(format!("threshold {item:?} is not key=value")))?;
        let value: f64 = value.trim().parse().map_err(|_| input(format!("threshold {item:?} has a non-numeric value")))?;
        match key.trim() {
            "tau_support" => t.tau_support = value,
            "confidence_floor" => t.confidence_floor = value,
            other => return Err(input(format!("unknown threshold {other:?} (expected tau_support or confidence_floor)"))),
        }
    }
    t.validate().map_err(|e| input(e.to_string()))?;
    Ok(t)
}

pub fn validate(args: &ValidateArgs, config: &RunConfig) -> Result<()> {
    let thresholds = parse_threshold_overrides(config, &args.thresholds)?;
    let sweep = args.sweep.clone().unwrap_or_default();
    for &tau in &sweep {
        if !(0.0..=1.0).contains(&tau) {
            return Err(input(format!("sweep value {tau} outside [0, 1]")));
        }
    }
    let d = resolve(config, BackendRole::Qa, &args.qa_backend)?;
    let qa = build_qa(&d).map_err(|e| input(format!("qa backend {:?}: {e}", args.qa_backend)))?;
    let sweep_path = sibling(&args.report, "sweep.tsv");
    let mut outputs = vec![args.report.as_path()];
    if !sweep.is_empty() {
        outputs.push(&sweep_path);
    }
    guard_outputs(&[args.corpus.as_path()], &outputs)?;

    let records = load_corpus(&args.corpus)?;
    let mut verdict_config = config.verdict_config();
    verdict_config.thresholds = thresholds.verdict_thresholds();
    let reports: Vec<_> = records.par_iter().map(|r| verify_claim(r, &r.qa_pairs, qa.as_ref(), &verdict_config)).collect();
    write_file(&args.report, &to_jsonl(&reports))?;

    let mut per_w: BTreeMap<FiveW, VerdictCounts> = BTreeMap::new();
    let mut total = VerdictCounts::default();
    let mut failures = 0;
    for report in &reports {
        for a in report.aspects.iter().filter(|a| a.w != FiveW::How) {
            per_w.entry(a.w).or_default().add(a.verdict);
        }
        total.merge(report.summary);
        failures += report.failures.len();
    }
    println!("{:<8} {:>10} {:>10} {:>15}", "aspect", "supported", "refuted", "not_verifiable");
    for (w, c) in &per_w {
        println!("{:<8} {:>10} {:>10} {:>15}", w.to_string(), c.supported, c.refuted, c.not_verifiable);
    }
    println!("{:<8} {:>10} {:>10} {:>15}", "total", total.supported, total.refuted, total.not_verifiable);
    if failures > 0 {
        log::warn!("{failures} question(s) could not be answered; see the report");
    }

    if !sweep.is_empty() {
        let mut tsv = String::from("tau_support\tsupported\trefuted\tnot_verifiable\n");
        println!("{:<12} {:>10} {:>10} {:>15}", "tau_support", "supported", "refuted", "not_verifiable");
        for &tau in &sweep {
            let t = fivew_core::verdict::Thresholds { tau_support: tau, ..verdict_config.thresholds };
            let mut counts = VerdictCounts::default();
            for report in &reports {
                counts.merge(report.rethreshold(&t).summary);
            }
            let _ = writeln!(tsv, "{tau}\t{}\t{}\t{}", counts.supported, counts.refuted, counts.not_verifiable);
            println!("{:<12} {:>10} {:>10} {:>15}", tau, counts.supported, counts.refuted, counts.not_verifiable);
        }
        write_file(&sweep_path, &tsv)?;
    }
    Ok(())
}

pub fn eval_grid(args: &EvalGridArgs, config: &RunConfig) -> Result<()> {
    let table = mapping_table(config)?;
    let conditions: Vec<Condition> =
        args.conditions.iter().map(|c| c.parse::<Condition>().map_err(input)).collect::<Result<_>>()?;
    let mut qags = Vec::new();
    for reference in &args.qag {
        let generator = if reference == "template" {
            None
        } else {
            let d = resolve(config, BackendRole::Qg, reference)?;
            Some(build_qg(&d).map_err(|e| input(format!("qg backend {reference:?}: {e}")))?)
        };
        qags.push(QagArm { name: reference.clone(), generator });
    }
    let mut qas = Vec::new();
    for reference in &args.qa {
        let d = resolve(config, BackendRole::Qa, reference)?;
        let backend = build_qa(&d).map_err(|e| input(format!("qa backend {reference:?}: {e}")))?;
        qas.push(QaArm { name: reference.clone(), backend });
    }
    let srl = config
        .first_backend(BackendRole::Srl)
        .ok_or_else(|| input("eval-grid needs an srl backend in the configuration"))?;
    let labeler = build_labeler(srl).map_err(|e| input(format!("srl backend: {e}")))?;
    guard_outputs(&[args.corpus.as_path()], &[args.report.as_path()])?;

    let records = load_corpus(&args.corpus)?;
    let cells = evaluate_grid(
        &records,
        labeler.as_ref(),
        &table,
        &qags,
        &qas,
        &conditions,
        options(config),
        &config.verdict_config(),
    );
    write_file(&args.report, &to_jsonl(&cells))?;

    println!(
        "{:<20} {:<20} {:<16} {:>8} {:>8} {:>8} {:>8} {:>7}",
        "qag", "qa", "condition", "bleu", "rougeL", "recall", "f1", "pairs"
    );
    for c in &cells {
        println!(
            "{:<20} {:<20} {:<16} {:>8} {:>8} {:>8} {:>8} {:>7}{}",
            c.qag_model,
            c.qa_model,
            c.condition.name(),
            pct(c.bleu),
            pct(c.rouge_l),
            pct(c.recall),
            pct(c.f1),
            c.pairs,
            if c.complete { "" } else { "  (incomplete)" }
        );
        for e in &c.errors {
            log::warn!("{} x {} ({}): {e}", c.qag_model, c.qa_model, c.condition);
        }
    }
    Ok(())
}
