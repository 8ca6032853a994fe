//! Question-answering validation of 5W aspects and the QAG x QA grid.
//!
//! Each question is answered from the claim's evidence, the answer is scored
//! against the gold span, and a three-way verdict is derived from token F1
//! and the answerer's confidence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{BackendError, QuestionAnswerer, QuestionGenerator, RoleLabeler};
use crate::corpus::ClaimRecord;
use crate::paraphrase::CandidateStatus;
use crate::qagen::{generate_for_text, FiveWQaPair, QagMode, QagOptions};
use crate::srl5w::{FiveW, MappingTable, SrlFrame};
use crate::textmetrics::{bleu, rouge_l, token_prf, tokenize, BleuConfig, Normalization, Prf};

/// What a QA backend returned for one question. An empty `answer_text`
/// means the backend found no answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResult {
    pub question: String,
    pub answer_text: String,
    pub confidence: f64,
}

impl AnswerResult {
    pub fn no_answer(question: impl Into<String>) -> Self {
        AnswerResult { question: question.into(), answer_text: String::new(), confidence: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.answer_text.trim().is_empty()
    }
}

/// Answers `question` from `evidence`. Empty evidence short-circuits to a
/// no-answer result without calling the backend.
pub fn answer_question(
    question: &str,
    evidence: &[String],
    backend: &dyn QuestionAnswerer,
) -> Result<AnswerResult, BackendError> {
    if evidence.iter().all(|p| p.trim().is_empty()) {
        return Ok(AnswerResult::no_answer(question));
    }
    backend.answer(question, evidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBundle {
    pub bleu: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    #[serde(rename = "tokenPRF")]
    pub token_prf: Prf,
}

impl ScoreBundle {
    pub const ZERO: ScoreBundle = ScoreBundle { bleu: 0.0, rouge_l: Prf::ZERO, token_prf: Prf::ZERO };
}

/// Scores a predicted answer against the gold span on casefolded,
/// punctuation-stripped word tokens. An empty prediction scores zero.
pub fn score_answer(predicted: &AnswerResult, gold_answer: &str, config: &BleuConfig) -> ScoreBundle {
    let candidate = tokenize(&predicted.answer_text, Normalization::WORDS);
    let gold = tokenize(gold_answer, Normalization::WORDS);
    if candidate.is_empty() || gold.is_empty() {
        return ScoreBundle::ZERO;
    }
    ScoreBundle {
        bleu: bleu(&candidate, std::slice::from_ref(&gold), config).unwrap_or(0.0),
        rouge_l: rouge_l(&candidate, &gold),
        token_prf: token_prf(&candidate, &gold),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    Supported,
    Refuted,
    NotVerifiable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Minimum token F1 for a Supported verdict.
    pub tau_support: f64,
    /// Answers with confidence below this are treated as absent.
    pub confidence_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau_support: 0.5, confidence_floor: 0.1 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("tau_support", self.tau_support), ("confidence_floor", self.confidence_floor)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

pub fn decide_verdict(scores: &ScoreBundle, predicted: &AnswerResult, thresholds: &Thresholds) -> Verdict {
    if predicted.is_empty() || predicted.confidence < thresholds.confidence_floor {
        Verdict::NotVerifiable
    } else if scores.token_prf.f1 >= thresholds.tau_support {
        Verdict::Supported
    } else {
        Verdict::Refuted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WVerdict {
    pub w: FiveW,
    pub question: String,
    pub gold_answer: String,
    pub predicted: AnswerResult,
    pub scores: ScoreBundle,
    pub verdict: Verdict,
}

/// The outcome for one aspect of a claim, folded over its pairs: any
/// Refuted pair refutes the aspect, otherwise any Supported pair supports
/// it, otherwise it is not verifiable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectVerdict {
    pub w: FiveW,
    pub verdict: Verdict,
    pub pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub supported: usize,
    pub refuted: usize,
    pub not_verifiable: usize,
}

impl VerdictCounts {
    pub fn add(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::Supported => self.supported += 1,
            Verdict::Refuted => self.refuted += 1,
            Verdict::NotVerifiable => self.not_verifiable += 1,
        }
    }

    pub fn merge(&mut self, other: VerdictCounts) {
        self.supported += other.supported;
        self.refuted += other.refuted;
        self.not_verifiable += other.not_verifiable;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFailure {
    pub w: FiveW,
    pub question: String,
    pub error: String,
}

/// One record of the verdict report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdictReport {
    pub claim_id: String,
    pub per_w: Vec<WVerdict>,
    pub aspects: Vec<AspectVerdict>,
    /// Counts over the five aspects.
    pub summary: VerdictCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<PairFailure>,
}

impl ClaimVerdictReport {
    pub fn aspect(&self, w: FiveW) -> Option<&AspectVerdict> {
        self.aspects.iter().find(|a| a.w == w)
    }

    /// Re-decides every answered pair under other thresholds, reusing the
    /// stored answers and scores.
    pub fn rethreshold(&self, thresholds: &Thresholds) -> ClaimVerdictReport {
        let per_w = self
            .per_w
            .iter()
            .map(|v| WVerdict { verdict: decide_verdict(&v.scores, &v.predicted, thresholds), ..v.clone() })
            .collect();
        let with_how = self.aspects.iter().any(|a| a.w == FiveW::How);
        fold_report(self.claim_id.clone(), per_w, self.failures.clone(), with_how)
    }

    /// The per-aspect verdicts as a map, for pattern comparisons.
    pub fn pattern(&self) -> BTreeMap<FiveW, Verdict> {
        self.aspects.iter().map(|a| (a.w, a.verdict)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VerdictConfig {
    pub thresholds: Thresholds,
    pub bleu: BleuConfig,
}

/// Validates every pair of `record` against its evidence. Backend failures
/// are recorded per pair and do not stop the remaining pairs.
pub fn verify_claim(
    record: &ClaimRecord,
    pairs: &[FiveWQaPair],
    backend: &dyn QuestionAnswerer,
    config: &VerdictConfig,
) -> ClaimVerdictReport {
    let evidence = record.evidence_texts();
    let mut per_w = Vec::new();
    let mut failures = Vec::new();
    for pair in pairs {
        match answer_question(&pair.question, &evidence, backend) {
            Ok(predicted) => {
                let scores = score_answer(&predicted, &pair.gold_answer, &config.bleu);
                let verdict = decide_verdict(&scores, &predicted, &config.thresholds);
                per_w.push(WVerdict {
                    w: pair.w,
                    question: pair.question.clone(),
                    gold_answer: pair.gold_answer.clone(),
                    predicted,
                    scores,
                    verdict,
                });
            }
            Err(e) => failures.push(PairFailure { w: pair.w, question: pair.question.clone(), error: e.to_string() }),
        }
    }
    let with_how = pairs.iter().any(|p| p.w == FiveW::How);
    fold_report(record.id.clone(), per_w, failures, with_how)
}

fn fold_report(claim_id: String, per_w: Vec<WVerdict>, failures: Vec<PairFailure>, with_how: bool) -> ClaimVerdictReport {
    let aspects: Vec<AspectVerdict> = FiveW::FIVE
        .iter()
        .chain(with_how.then_some(&FiveW::How))
        .map(|&w| aspect_verdict(w, &per_w, &failures))
        .collect();
    let mut summary = VerdictCounts::default();
    for a in aspects.iter().filter(|a| a.w != FiveW::How) {
        summary.add(a.verdict);
    }
    ClaimVerdictReport { claim_id, per_w, aspects, summary, failures }
}

fn aspect_verdict(w: FiveW, per_w: &[WVerdict], failures: &[PairFailure]) -> AspectVerdict {
    let verdicts: Vec<Verdict> = per_w.iter().filter(|v| v.w == w).map(|v| v.verdict).collect();
    let failed = failures.iter().filter(|f| f.w == w).count();
    let verdict = if verdicts.contains(&Verdict::Refuted) {
        Verdict::Refuted
    } else if verdicts.contains(&Verdict::Supported) {
        Verdict::Supported
    } else {
        Verdict::NotVerifiable
    };
    let reason = match (verdicts.len(), failed) {
        (0, 0) => Some("no claim".to_owned()),
        (0, _) => Some("backend error".to_owned()),
        _ => None,
    };
    AspectVerdict { w, verdict, pairs: verdicts.len() + failed, reason }
}

/// Which texts of a record contribute pairs to a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    /// The claim alone.
    #[serde(rename = "claim")]
    ClaimOnly,
    /// The claim together with each of its kept paraphrases.
    #[serde(rename = "plus-paraphrase")]
    PlusParaphrase,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::ClaimOnly => "claim",
            Condition::PlusParaphrase => "plus-paraphrase",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "claim" => Ok(Condition::ClaimOnly),
            "plus-paraphrase" => Ok(Condition::PlusParaphrase),
            other => Err(format!("unknown condition {other:?} (expected claim or plus-paraphrase)")),
        }
    }
}

/// A question-generation arm of the grid. `generator: None` is the
/// template engine.
#[derive(Clone)]
pub struct QagArm {
    pub name: String,
    pub generator: Option<Arc<dyn QuestionGenerator>>,
}

#[derive(Clone)]
pub struct QaArm {
    pub name: String,
    pub backend: Arc<dyn QuestionAnswerer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGridCell {
    pub qag_model: String,
    pub qa_model: String,
    pub condition: Condition,
    pub bleu: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    pub recall: f64,
    pub f1: f64,
    pub pairs: usize,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

/// Identifier under which a paraphrase's frames are looked up.
pub fn paraphrase_text_id(claim_id: &str, index: usize) -> String {
    format!("{claim_id}#p{index}")
}

struct GridText<'a> {
    id: String,
    text: &'a str,
    record: usize,
    paraphrase: bool,
}

/// Order-independent mean: values are summed in sorted order.
fn stable_mean(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Full cross product of question generators, answerers and conditions,
/// in that nesting order. Frames come from `labeler`; a failure inside a
/// cell marks only that cell incomplete.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_grid(
    records: &[ClaimRecord],
    labeler: &dyn RoleLabeler,
    table: &MappingTable,
    qags: &[QagArm],
    qas: &[QaArm],
    conditions: &[Condition],
    options: QagOptions,
    config: &VerdictConfig,
) -> Vec<EvalGridCell> {
    let mut texts = Vec::new();
    for (r, record) in records.iter().enumerate() {
        texts.push(GridText { id: record.id.clone(), text: &record.claim, record: r, paraphrase: false });
        for p in record.paraphrases.iter().filter(|p| p.status == CandidateStatus::Kept) {
            texts.push(GridText { id: paraphrase_text_id(&record.id, p.index), text: &p.text, record: r, paraphrase: true });
        }
    }
    let needs_paraphrases = conditions.contains(&Condition::PlusParaphrase);
    let frames: HashMap<String, Result<Vec<SrlFrame>, String>> = texts
        .par_iter()
        .filter(|t| needs_paraphrases || !t.paraphrase)
        .map(|t| (t.id.clone(), labeler.label(&t.id, t.text).map_err(|e| format!("{}: {e}", t.id))))
        .collect();
    let evidence: Vec<Vec<String>> = records.iter().map(ClaimRecord::evidence_texts).collect();

    let mut cells = Vec::new();
    for qag in qags {
        for qa in qas {
            for &condition in conditions {
                let selected: Vec<&GridText> =
                    texts.iter().filter(|t| !t.paraphrase || condition == Condition::PlusParaphrase).collect();
                let outcomes: Vec<Result<Vec<ScoreBundle>, String>> = selected
                    .par_iter()
                    .map(|t| grid_text_scores(t, &frames[&t.id], &evidence[t.record], table, qag, qa, options, config))
                    .collect();
                let mut scores = Vec::new();
                let mut errors = Vec::new();
                for outcome in outcomes {
                    match outcome {
                        Ok(s) => scores.extend(s),
                        Err(e) => errors.push(e),
                    }
                }
                cells.push(EvalGridCell {
                    qag_model: qag.name.clone(),
                    qa_model: qa.name.clone(),
                    condition,
                    bleu: stable_mean(scores.iter().map(|s| s.bleu).collect()),
                    rouge_l: stable_mean(scores.iter().map(|s| s.rouge_l.f1).collect()),
                    recall: stable_mean(scores.iter().map(|s| s.token_prf.recall).collect()),
                    f1: stable_mean(scores.iter().map(|s| s.token_prf.f1).collect()),
                    pairs: scores.len(),
                    complete: errors.is_empty(),
                    errors,
                });
            }
        }
    }
    cells
}

#[allow(clippy::too_many_arguments)]
fn grid_text_scores(
    text: &GridText<'_>,
    frames: &Result<Vec<SrlFrame>, String>,
    evidence: &[String],
    table: &MappingTable,
    qag: &QagArm,
    qa: &QaArm,
    options: QagOptions,
    config: &VerdictConfig,
) -> Result<Vec<ScoreBundle>, String> {
    let frames = frames.as_ref().map_err(Clone::clone)?;
    let mode = match &qag.generator {
        None => QagMode::Template,
        Some(g) => QagMode::Generative { backend: g.as_ref(), strict: true },
    };
    let pairs = generate_for_text(&text.id, text.text, frames, table, mode, options).map_err(|e| e.to_string())?;
    pairs
        .pairs
        .iter()
        .map(|pair| {
            let predicted = answer_question(&pair.question, evidence, qa.backend.as_ref())
                .map_err(|e| format!("{}: {e}", text.id))?;
            Ok(score_answer(&predicted, &pair.gold_answer, &config.bleu))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{MockQa, QaMode};
    use crate::fixtures;

    fn answer(text: &str, confidence: f64) -> AnswerResult {
        AnswerResult { question: "q".into(), answer_text: text.into(), confidence }
    }

    #[test]
    fn empty_evidence_short_circuits() {
        let qa = MockQa::new(QaMode::Sentence);
        assert_eq!(answer_question("Who ran?", &[], &qa).unwrap(), AnswerResult::no_answer("Who ran?"));
    }

    #[test]
    fn mock_answers_from_first_covering_sentence() {
        let qa = MockQa::new(QaMode::Sentence);
        let evidence = vec!["Bob slept. Ann ran home fast.".to_owned(), "Ann ran.".to_owned()];
        assert_eq!(answer_question("Who ran home?", &evidence, &qa).unwrap().answer_text, "Ann ran home fast.");
    }

    #[test]
    fn moderna_when_question() {
        let qa = MockQa::new(QaMode::Sentence);
        let got = answer_question("When the patents existed?", &fixtures::moderna_evidence_texts(), &qa).unwrap();
        assert!(got.answer_text.contains("before the pandemic"), "{got:?}");
    }

    #[test]
    fn score_examples() {
        let cfg = BleuConfig::default();
        let same = score_answer(&answer("Before the pandemic", 1.0), "before the pandemic", &cfg);
        assert!((same.bleu - 1.0).abs() < 1e-12);
        assert_eq!(same.rouge_l.f1, 1.0);
        assert_eq!(same.token_prf.f1, 1.0);

        assert_eq!(score_answer(&answer("", 0.0), "x", &cfg), ScoreBundle::ZERO);

        let s = score_answer(&answer("before the pandemic started", 1.0), "before pandemic", &cfg);
        assert!((s.token_prf.precision - 0.5).abs() < 1e-12);
        assert!((s.token_prf.recall - 1.0).abs() < 1e-12);
        assert!((s.token_prf.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn decision_rule() {
        let t = Thresholds::default();
        let with_f1 = |f1: f64| ScoreBundle { token_prf: Prf { precision: f1, recall: f1, f1 }, ..ScoreBundle::ZERO };
        assert_eq!(decide_verdict(&with_f1(0.9), &answer("x", 0.8), &t), Verdict::Supported);
        assert_eq!(decide_verdict(&with_f1(0.9), &answer("", 0.8), &t), Verdict::NotVerifiable);
        assert_eq!(decide_verdict(&with_f1(0.2), &answer("x", 0.8), &t), Verdict::Refuted);
        assert_eq!(decide_verdict(&with_f1(0.9), &answer("x", 0.05), &t), Verdict::NotVerifiable);
        assert_eq!(decide_verdict(&with_f1(0.5), &answer("x", 0.1), &t), Verdict::Supported);
    }

    #[test]
    fn moderna_pattern() {
        let record = fixtures::moderna_record();
        let report = verify_claim(&record, &record.qa_pairs, &fixtures::moderna_scripted_qa(), &VerdictConfig::default());
        assert_eq!(report.pattern(), fixtures::moderna_expected_pattern());
        assert_eq!(report.aspect(FiveW::Where).unwrap().reason.as_deref(), Some("no claim"));
        assert_eq!(report.summary, VerdictCounts { supported: 1, refuted: 2, not_verifiable: 2 });
    }

    #[test]
    fn empty_evidence_is_not_verifiable() {
        let mut record = fixtures::moderna_record();
        record.evidence.clear();
        let report = verify_claim(&record, &record.qa_pairs, &fixtures::moderna_scripted_qa(), &VerdictConfig::default());
        assert!(report.aspects.iter().all(|a| a.verdict == Verdict::NotVerifiable));
        assert_eq!(report.aspects.len(), 5);
    }

    #[test]
    fn single_exact_pair_is_supported() {
        let (records, _) = fixtures::grid_fixture(1, 3);
        let mut record = records[0].clone();
        let frames = fixtures::grid_fixture(1, 3).1;
        let pairs = generate_for_text(
            &record.id,
            &record.claim,
            &frames[&record.id],
            &MappingTable::default(),
            QagMode::Template,
            QagOptions::default(),
        )
        .unwrap()
        .pairs;
        record.qa_pairs = vec![pairs[0].clone()];
        let report = verify_claim(&record, &record.qa_pairs, &MockQa::new(QaMode::Extractive), &VerdictConfig::default());
        assert_eq!(report.per_w.len(), 1);
        assert_eq!(report.per_w[0].verdict, Verdict::Supported);
        assert_eq!(report.aspect(pairs[0].w).unwrap().verdict, Verdict::Supported);
    }

    #[test]
    fn rethreshold_matches_a_fresh_run() {
        let (records, _) = fixtures::synthetic_corpus(8, 2);
        let qa = MockQa::new(QaMode::Sentence);
        for tau in [0.1, 0.5, 0.9] {
            let config = VerdictConfig { thresholds: Thresholds { tau_support: tau, ..Thresholds::default() }, ..Default::default() };
            for r in &records {
                let base = verify_claim(r, &r.qa_pairs, &qa, &VerdictConfig::default());
                assert_eq!(base.rethreshold(&config.thresholds), verify_claim(r, &r.qa_pairs, &qa, &config));
            }
        }
    }

    #[test]
    fn stable_mean_is_order_free() {
        let a = vec![0.1, 0.7, 1e-17, 0.2, 0.3333];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(stable_mean(a).to_bits(), stable_mean(b).to_bits());
        assert_eq!(stable_mean(vec![]), 0.0);
    }
}
