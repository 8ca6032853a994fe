//! Paraphrase generation, filtering and diversity scoring.
//!
//! Candidates pass two filters in order. Coverage keeps a candidate only if
//! its word edit distance to the claim exceeds a threshold, so trivial
//! rewrites are discarded. Correctness keeps a coverage survivor only if an
//! NLI backend says the claim entails it. Survivors are then scored for
//! diversity with the floored inverse BLEU against the claim and against
//! each other.
//!
//! Model reports carry two coverage figures because the published coverage
//! numbers have no stated unit: the mean number of coverage survivors per
//! claim and the fraction of generated candidates that survive.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, NliLabel, NliModel, Paraphraser};
use crate::textmetrics::{inv_bleu, med, tokenize, InvBleuConfig, MetricError, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CandidateStatus {
    Kept,
    DroppedCoverage,
    DroppedCorrectness,
}

/// One generated paraphrase. Freshly generated candidates are `Kept`
/// until a filter drops them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseCandidate {
    pub claim_id: String,
    /// 1-based position in the generator's output.
    pub index: usize,
    pub text: String,
    pub med_to_claim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nli_label: Option<NliLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diversity_d: Option<f64>,
    pub status: CandidateStatus,
}

#[derive(Debug, Error)]
pub enum ParaphraseError {
    #[error("claim {claim_id}: {source}")]
    Backend { claim_id: String, source: BackendError },
    #[error("claim {claim_id}: {source}")]
    Metric { claim_id: String, source: MetricError },
    #[error("claim {claim_id} is empty")]
    EmptyClaim { claim_id: String },
}

impl ParaphraseError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, ParaphraseError::Backend { source, .. } if source.is_retriable())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseConfig {
    /// Paraphrases requested per claim.
    pub n: usize,
    /// Candidates need a word edit distance strictly above this.
    pub med_threshold: usize,
    /// Also require the paraphrase to entail the claim.
    pub bidirectional: bool,
    pub inv_bleu: InvBleuConfig,
}

impl Default for ParaphraseConfig {
    fn default() -> Self {
        ParaphraseConfig { n: 5, med_threshold: 2, bidirectional: false, inv_bleu: InvBleuConfig::default() }
    }
}

fn words(text: &str) -> crate::textmetrics::TokenSeq {
    tokenize(text, Normalization::WORDS)
}

/// Requests `n` paraphrases and wraps them as candidates. Empty outputs and
/// casefolded repeats are dropped; surviving candidates keep their original
/// generation index.
pub fn generate_candidates(
    claim_id: &str,
    claim: &str,
    n: usize,
    backend: &dyn Paraphraser,
) -> Result<Vec<ParaphraseCandidate>, ParaphraseError> {
    let claim_words = words(claim);
    if claim_words.is_empty() {
        return Err(ParaphraseError::EmptyClaim { claim_id: claim_id.to_owned() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let outputs = backend
        .paraphrase(claim, n)
        .map_err(|source| ParaphraseError::Backend { claim_id: claim_id.to_owned(), source })?;
    let mut seen = HashSet::new();
    Ok(outputs
        .into_iter()
        .take(n)
        .enumerate()
        .filter_map(|(i, text)| {
            let text = text.trim().to_owned();
            let tokens = words(&text);
            if tokens.is_empty() || !seen.insert(text.to_lowercase()) {
                return None;
            }
            Some(ParaphraseCandidate {
                claim_id: claim_id.to_owned(),
                index: i + 1,
                med_to_claim: med(&tokens, &claim_words),
                text,
                nli_label: None,
                diversity_d: None,
                status: CandidateStatus::Kept,
            })
        })
        .collect())
}

/// Drops every kept candidate whose edit distance to the claim is at most
/// `threshold`.
pub fn filter_coverage(candidates: &mut [ParaphraseCandidate], threshold: usize) {
    for c in candidates.iter_mut() {
        if c.status == CandidateStatus::Kept && c.med_to_claim <= threshold {
            c.status = CandidateStatus::DroppedCoverage;
            c.nli_label = None;
            c.diversity_d = None;
        }
    }
}

/// Asks `backend` whether the claim entails each kept candidate and drops
/// the ones it does not. With `bidirectional`, the candidate must also
/// entail the claim; the recorded label is the first non-entailment seen.
pub fn filter_correctness(
    candidates: &mut [ParaphraseCandidate],
    claim: &str,
    backend: &dyn NliModel,
    bidirectional: bool,
) -> Result<(), ParaphraseError> {
    for c in candidates.iter_mut().filter(|c| c.status == CandidateStatus::Kept) {
        let backend_err = |source| ParaphraseError::Backend { claim_id: c.claim_id.clone(), source };
        let mut label = backend.classify(claim, &c.text).map_err(backend_err)?.label;
        if bidirectional && label == NliLabel::Entailment {
            label = backend.classify(&c.text, claim).map_err(backend_err)?.label;
        }
        c.nli_label = Some(label);
        if label != NliLabel::Entailment {
            c.status = CandidateStatus::DroppedCorrectness;
            c.diversity_d = None;
        }
    }
    Ok(())
}

/// Sets `diversity_d` on every kept candidate: the mean floored inverse
/// BLEU of the candidate against the claim and against every other kept
/// candidate.
pub fn score_diversity(
    claim: &str,
    candidates: &mut [ParaphraseCandidate],
    config: &InvBleuConfig,
) -> Result<(), MetricError> {
    let kept: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].status == CandidateStatus::Kept).collect();
    let mut scores = Vec::with_capacity(kept.len());
    for &j in &kept {
        let target = &candidates[j].text;
        let mut total = inv_bleu(claim, target, config)?;
        for &k in kept.iter().filter(|&&k| k != j) {
            total += inv_bleu(&candidates[k].text, target, config)?;
        }
        scores.push(total / kept.len() as f64);
    }
    for (&j, d) in kept.iter().zip(scores) {
        candidates[j].diversity_d = Some(d);
    }
    Ok(())
}

/// Runs generation, both filters and diversity scoring for one claim.
pub fn run_pipeline(
    claim_id: &str,
    claim: &str,
    paraphraser: &dyn Paraphraser,
    nli: &dyn NliModel,
    config: &ParaphraseConfig,
) -> Result<Vec<ParaphraseCandidate>, ParaphraseError> {
    let mut candidates = generate_candidates(claim_id, claim, config.n, paraphraser)?;
    filter_coverage(&mut candidates, config.med_threshold);
    filter_correctness(&mut candidates, claim, nli, config.bidirectional)?;
    score_diversity(claim, &mut candidates, &config.inv_bleu)
        .map_err(|source| ParaphraseError::Metric { claim_id: claim_id.to_owned(), source })?;
    Ok(candidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexDiversity {
    pub index: usize,
    /// Mean diversity of kept candidates at this generation index, absent
    /// when none was kept.
    pub mean_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseModelReport {
    pub model_id: String,
    pub claims: usize,
    pub generated: usize,
    /// Mean number of coverage survivors per claim.
    pub coverage_mean_kept: f64,
    /// Coverage survivors over generated candidates.
    pub coverage_pass_fraction: f64,
    /// Entailed candidates over coverage survivors.
    pub correctness_fraction: f64,
    pub kept: usize,
    /// Mean diversity over all kept candidates, absent when none was kept.
    pub diversity_mean: Option<f64>,
    pub per_index_diversity: Vec<IndexDiversity>,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Folds per-claim candidate lists into a model report. `claims` counts
/// every attempted claim, including failed ones listed in `errors`.
pub fn summarize(
    model_id: &str,
    claims: usize,
    candidates: &[ParaphraseCandidate],
    n: usize,
    errors: Vec<String>,
) -> ParaphraseModelReport {
    let generated = candidates.len();
    let covered = candidates.iter().filter(|c| c.status != CandidateStatus::DroppedCoverage).count();
    let kept: Vec<&ParaphraseCandidate> = candidates.iter().filter(|c| c.status == CandidateStatus::Kept).collect();
    let succeeded = claims - errors.len();
    let mean = |ds: Vec<f64>| (!ds.is_empty()).then(|| ds.iter().sum::<f64>() / ds.len() as f64);
    let mut by_index: BTreeMap<usize, Vec<f64>> = (1..=n).map(|i| (i, Vec::new())).collect();
    for c in &kept {
        by_index.entry(c.index).or_default().extend(c.diversity_d);
    }
    ParaphraseModelReport {
        model_id: model_id.to_owned(),
        claims,
        generated,
        coverage_mean_kept: ratio(covered, succeeded),
        coverage_pass_fraction: ratio(covered, generated),
        correctness_fraction: ratio(kept.len(), covered),
        kept: kept.len(),
        diversity_mean: mean(kept.iter().filter_map(|c| c.diversity_d).collect()),
        per_index_diversity: by_index.into_iter().map(|(index, ds)| IndexDiversity { index, mean_d: mean(ds) }).collect(),
        complete: errors.is_empty(),
        errors,
    }
}

/// Result of running one model over a claim set.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub report: ParaphraseModelReport,
    pub candidates: Vec<ParaphraseCandidate>,
}

/// Runs every model over `claims` (pairs of id and text). Claims run in
/// parallel; a failing claim is listed in its model's report, which is then
/// marked incomplete.
pub fn compare_models(
    claims: &[(String, String)],
    models: &[(String, &dyn Paraphraser)],
    nli: &dyn NliModel,
    config: &ParaphraseConfig,
) -> Vec<ModelRun> {
    models
        .iter()
        .map(|(model_id, paraphraser)| {
            let results: Vec<Result<Vec<ParaphraseCandidate>, ParaphraseError>> = claims
                .par_iter()
                .map(|(id, text)| run_pipeline(id, text, *paraphraser, nli, config))
                .collect();
            let mut candidates = Vec::new();
            let mut errors = Vec::new();
            for r in results {
                match r {
                    Ok(c) => candidates.extend(c),
                    Err(e) => errors.push(e.to_string()),
                }
            }
            ModelRun { report: summarize(model_id, claims.len(), &candidates, config.n, errors), candidates }
        })
        .collect()
}

/// Two-column `index<TAB>mean d` series for plotting; indices without a
/// kept candidate are omitted.
pub fn diversity_series(report: &ParaphraseModelReport) -> String {
    report
        .per_index_diversity
        .iter()
        .filter_map(|p| p.mean_d.map(|d| format!("{}\t{d:.6}\n", p.index)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Lexicon, MockNli, MockParaphraser, NliOutput, ReplayParaphraser};
    use crate::fixtures;

    struct Fixed(Vec<String>);

    impl Paraphraser for Fixed {
        fn paraphrase(&self, _text: &str, n: usize) -> Result<Vec<String>, BackendError> {
            Ok(self.0.iter().take(n).cloned().collect())
        }
    }

    struct Label(NliLabel);

    impl NliModel for Label {
        fn classify(&self, _p: &str, _h: &str) -> Result<NliOutput, BackendError> {
            Ok(NliOutput { label: self.0, scores: [1.0, 0.0, 0.0] })
        }
    }

    struct Down;

    impl Paraphraser for Down {
        fn paraphrase(&self, _text: &str, _n: usize) -> Result<Vec<String>, BackendError> {
            Err(BackendError::Transport("connection refused".into()))
        }
    }

    fn candidate(index: usize, text: &str, med_to_claim: usize) -> ParaphraseCandidate {
        ParaphraseCandidate {
            claim_id: "c".into(),
            index,
            text: text.into(),
            med_to_claim,
            nli_label: None,
            diversity_d: None,
            status: CandidateStatus::Kept,
        }
    }

    #[test]
    fn echo_and_under_delivery() {
        let claim = "Ann met Bob on Monday";
        let echo = Fixed(vec![claim.to_owned(); 5]);
        let got = generate_candidates("c", claim, 5, &echo).unwrap();
        // repeats collapse to the first occurrence
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].med_to_claim, 0);

        let distinct = Fixed((1..=5).map(|i| format!("{claim} {i}")).collect());
        let got = generate_candidates("c", claim, 5, &distinct).unwrap();
        assert_eq!(got.len(), 5);
        assert!(got.iter().all(|c| c.med_to_claim == 1));

        let short = Fixed(vec!["a b c".into(), "d e f".into(), "g h i".into()]);
        let got = generate_candidates("c", claim, 5, &short).unwrap();
        assert_eq!(got.iter().map(|c| c.index).collect::<Vec<_>>(), [1, 2, 3]);

        assert!(generate_candidates("c", claim, 0, &short).unwrap().is_empty());
        let err = generate_candidates("c9", claim, 5, &Down).unwrap_err();
        assert!(err.is_retriable());
        assert!(err.to_string().contains("c9"));
    }

    #[test]
    fn transcript_replay() {
        let mut replay = ReplayParaphraser::new();
        replay.record(fixtures::MODERNA_CLAIM, &fixtures::gpt3_transcript_output()).unwrap();
        let got = generate_candidates("moderna", fixtures::MODERNA_CLAIM, 5, &replay).unwrap();
        assert_eq!(got.len(), 5);
        assert_eq!(got[4].text, fixtures::MODERNA_PARAPHRASES[4]);
    }

    #[test]
    fn coverage_threshold_is_strict() {
        let mut cs = vec![candidate(1, "x", 0), candidate(2, "y", 2), candidate(3, "z", 3)];
        filter_coverage(&mut cs, 2);
        let statuses: Vec<_> = cs.iter().map(|c| c.status).collect();
        assert_eq!(statuses, [CandidateStatus::DroppedCoverage, CandidateStatus::DroppedCoverage, CandidateStatus::Kept]);
    }

    #[test]
    fn correctness_filter() {
        let mut cs = vec![candidate(1, "x", 5), candidate(2, "y", 5)];
        filter_correctness(&mut cs, "c", &Label(NliLabel::Entailment), false).unwrap();
        assert!(cs.iter().all(|c| c.status == CandidateStatus::Kept && c.nli_label == Some(NliLabel::Entailment)));

        let mut cs = vec![candidate(1, "Ann met Bob", 5), candidate(2, "Ann met Bob", 5)];
        let mut lex = Lexicon::new();
        lex.add_antonym("met", "avoided");
        let nli_ant = MockNli::new(lex);
        cs[1].text = "Ann avoided Bob".into();
        filter_correctness(&mut cs, "Ann met Bob", &nli_ant, false).unwrap();
        assert_eq!(cs[0].status, CandidateStatus::Kept);
        assert_eq!(cs[1].status, CandidateStatus::DroppedCorrectness);
        assert_eq!(cs[1].nli_label, Some(NliLabel::Contradiction));
    }

    #[test]
    fn bidirectional_requires_both() {
        let nli = MockNli::new(Lexicon::new());
        // "Ann met Bob" entails the shorter "Ann met" only one way
        let mut one = vec![candidate(1, "Ann met", 5)];
        filter_correctness(&mut one, "Ann met Bob", &nli, false).unwrap();
        assert_eq!(one[0].status, CandidateStatus::Kept);
        let mut both = vec![candidate(1, "Ann met", 5)];
        filter_correctness(&mut both, "Ann met Bob", &nli, true).unwrap();
        assert_eq!(both[0].status, CandidateStatus::DroppedCorrectness);
    }

    #[test]
    fn diversity_examples() {
        let cfg = InvBleuConfig::default();
        let mut single = vec![candidate(1, "the cat sat on the mat", 3)];
        score_diversity("the cat sat on the mat", &mut single, &cfg).unwrap();
        assert!((single[0].diversity_d.unwrap() - 1.0).abs() < 1e-12);

        let mut twins = vec![candidate(1, "alpha beta gamma delta", 4), candidate(2, "alpha beta gamma delta", 4)];
        score_diversity("one two three four", &mut twins, &cfg).unwrap();
        for c in &twins {
            assert!((c.diversity_d.unwrap() - 50.5).abs() < 1e-9, "{:?}", c.diversity_d);
        }
    }

    #[test]
    fn report_fields() {
        let claims: Vec<(String, String)> = ["Ann met Bob on Monday", "The council opened the bridge", "Bob visited Paris"]
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("c{i}"), t.to_string()))
            .collect();
        let para = MockParaphraser::new(Lexicon::builtin());
        let nli = MockNli::new(Lexicon::builtin());
        let runs = compare_models(&claims, &[("mock".into(), &para as &dyn Paraphraser)], &nli, &ParaphraseConfig::default());
        let r = &runs[0].report;
        assert_eq!(r.claims, 3);
        assert_eq!(r.generated, runs[0].candidates.len());
        assert_eq!(r.per_index_diversity.iter().map(|p| p.index).collect::<Vec<_>>(), [1, 2, 3, 4, 5]);
        assert!(r.complete);
        assert!((0.0..=1.0).contains(&r.coverage_pass_fraction));
    }

    #[test]
    fn correctness_fraction_from_fixture() {
        // 76 survivors, 67 entailed: 67 / 76 = 0.881578...
        let mut cs: Vec<ParaphraseCandidate> = (1..=80).map(|i| candidate(i, "t", if i <= 76 { 5 } else { 1 })).collect();
        filter_coverage(&mut cs, 2);
        for c in cs.iter_mut().filter(|c| c.status == CandidateStatus::Kept).skip(67) {
            c.status = CandidateStatus::DroppedCorrectness;
        }
        let r = summarize("m", 16, &cs, 5, vec![]);
        assert!((r.correctness_fraction - 67.0 / 76.0).abs() < 1e-12);
        assert!((r.correctness_fraction - 0.8816).abs() < 1e-4);
        assert!((r.coverage_mean_kept - 76.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn failed_claim_marks_report_incomplete() {
        let claims = vec![("a".to_owned(), "Ann met Bob".to_owned())];
        let runs = compare_models(&claims, &[("down".into(), &Down as &dyn Paraphraser)], &Label(NliLabel::Entailment), &ParaphraseConfig::default());
        assert!(!runs[0].report.complete);
        assert_eq!(runs[0].report.errors.len(), 1);
    }

    #[test]
    fn series_format() {
        let r = summarize("m", 1, &[ParaphraseCandidate { diversity_d: Some(2.5), ..candidate(2, "t", 5) }], 3, vec![]);
        assert_eq!(diversity_series(&r), "2\t2.500000\n");
    }
}
