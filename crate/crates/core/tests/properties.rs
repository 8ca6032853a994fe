use std::collections::HashMap;

use fivew_core::backends::{Lexicon, MockNli, MockParaphraser};
use fivew_core::corpus::{dedup, parse_corpus, split, stats, to_jsonl, ClaimRecord, EntailmentClass, SourceTag};
use fivew_core::paraphrase::{
    filter_correctness, filter_coverage, run_pipeline, score_diversity, CandidateStatus, ParaphraseConfig,
};
use fivew_core::textmetrics::{
    bleu, inv_bleu, lcs_len, med, rouge_l, token_prf, BleuConfig, InvBleuConfig, Normalization, TokenSeq,
};
use fivew_core::verdict::{decide_verdict, AnswerResult, ScoreBundle, Thresholds, Verdict};
use fivew_core::textmetrics::Prf;
use proptest::prelude::*;

fn seq(tokens: &[String]) -> TokenSeq {
    TokenSeq::from_tokens(tokens.iter().cloned()).unwrap()
}

fn words(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..=max)
}

/// Edit distance by memoized recursion over suffixes.
fn med_oracle(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() || b.is_empty() {
            return a.len() + b.len();
        }
        if let Some(&v) = memo.get(&(a.len(), b.len())) {
            return v;
        }
        let v = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo).min(go(a, &b[1..], memo)).min(go(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), v);
        v
    }
    go(a, b, &mut HashMap::new())
}

/// Longest common subsequence by trying every subsequence of `a`.
fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    let is_subseq = |s: &[&String]| {
        let mut it = b.iter();
        s.iter().all(|x| it.any(|y| y == *x))
    };
    (0u32..1 << a.len())
        .filter_map(|mask| {
            let s: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
            is_subseq(&s).then_some(s.len())
        })
        .max()
        .unwrap_or(0)
}

proptest! {
    #[test]
    fn med_matches_recursion(a in words(12), b in words(12)) {
        prop_assert_eq!(med(&seq(&a), &seq(&b)), med_oracle(&a, &b));
    }

    #[test]
    fn med_is_a_metric(a in words(8), b in words(8), c in words(8)) {
        let (a, b, c) = (seq(&a), seq(&b), seq(&c));
        prop_assert_eq!(med(&a, &b), med(&b, &a));
        prop_assert!(med(&a, &c) <= med(&a, &b) + med(&b, &c));
        prop_assert_eq!(med(&a, &a), 0);
    }

    #[test]
    fn lcs_matches_enumeration(a in words(10), b in words(10)) {
        prop_assert_eq!(lcs_len(&a, &b), lcs_oracle(&a, &b));
        let r = rouge_l(&seq(&a), &seq(&b));
        if !a.is_empty() && !b.is_empty() {
            let l = lcs_oracle(&a, &b) as f64;
            prop_assert!((r.precision - l / a.len() as f64).abs() < 1e-12);
            prop_assert!((r.recall - l / b.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bleu_bounds_and_identity(a in words(10), b in words(10)) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let cfg = BleuConfig::default();
        let s = bleu(&seq(&a), &[seq(&b)], &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((bleu(&seq(&a), &[seq(&a)], &cfg).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inv_bleu_bounds(a in words(10), b in words(10)) {
        let (a, b) = (a.join(" "), b.join(" "));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let d = inv_bleu(&a, &b, &InvBleuConfig::default()).unwrap();
        prop_assert!((1.0..=100.0).contains(&d));
    }

    #[test]
    fn token_prf_bounds(a in words(10), b in words(10)) {
        let p = token_prf(&seq(&a), &seq(&b));
        for v in [p.precision, p.recall, p.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(token_prf(&seq(&a), &seq(&b)).f1, token_prf(&seq(&b), &seq(&a)).f1);
    }

    #[test]
    fn raising_tau_never_supports_more(f1 in 0.0..=1.0f64, conf in 0.0..=1.0f64, t1 in 0.0..=1.0f64, t2 in 0.0..=1.0f64, empty in any::<bool>()) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let scores = ScoreBundle { token_prf: Prf { precision: f1, recall: f1, f1 }, ..ScoreBundle::ZERO };
        let answer = AnswerResult { question: "q".into(), answer_text: if empty { String::new() } else { "x".into() }, confidence: conf };
        let at = |tau| decide_verdict(&scores, &answer, &Thresholds { tau_support: tau, confidence_floor: 0.1 });
        let (a, b) = (at(lo), at(hi));
        prop_assert!(!(a == Verdict::Refuted && b == Verdict::Supported));
        prop_assert_eq!(a == Verdict::NotVerifiable, b == Verdict::NotVerifiable);
        prop_assert_eq!(a == Verdict::NotVerifiable, empty || conf < 0.1);
    }
}

fn claim_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec!["Ann", "bob", "shows", "big", "report", "city", "new", "rules", "today", "the"]),
        3..10,
    )
    .prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paraphrase_filters_are_monotone_and_idempotent(claim in claim_text(), n in 1usize..8) {
        let para = MockParaphraser::new(Lexicon::builtin());
        let nli = MockNli::new(Lexicon::builtin());
        let config = ParaphraseConfig { n, ..ParaphraseConfig::default() };
        let mut out = run_pipeline("c", &claim, &para, &nli, &config).unwrap();
        prop_assert!(out.len() <= n);
        for c in &out {
            prop_assert_eq!(c.status == CandidateStatus::DroppedCoverage, c.med_to_claim <= 2);
            prop_assert_eq!(c.nli_label.is_some(), c.status != CandidateStatus::DroppedCoverage);
            prop_assert_eq!(c.diversity_d.is_some(), c.status == CandidateStatus::Kept);
            if let Some(d) = c.diversity_d {
                prop_assert!((1.0..=100.0).contains(&d));
            }
        }
        let before = out.clone();
        filter_coverage(&mut out, 2);
        filter_correctness(&mut out, &claim, &nli, false).unwrap();
        score_diversity(&claim, &mut out, &InvBleuConfig::default()).unwrap();
        prop_assert_eq!(out, before);
    }
}

fn record_strategy() -> impl Strategy<Value = ClaimRecord> {
    (claim_text(), 0usize..3, 0usize..7, any::<u32>()).prop_map(|(claim, label, source, id)| {
        ClaimRecord::new(format!("r{id}"), SourceTag::ALL[source], claim, EntailmentClass::ALL[label])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dedup_is_idempotent(records in prop::collection::vec(record_strategy(), 0..60)) {
        let (once, _) = dedup(records);
        let (twice, dropped) = dedup(once.clone());
        prop_assert_eq!(dropped, 0);
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn serialization_round_trips(records in prop::collection::vec(record_strategy(), 0..20)) {
        let text = to_jsonl(&records);
        let back = parse_corpus(&text).unwrap();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(to_jsonl(&back), text);
    }

    #[test]
    fn split_partitions(records in prop::collection::vec(record_strategy(), 0..80), seed in any::<u64>(), a in 1u32..8, b in 1u32..8) {
        let records: Vec<ClaimRecord> = records.into_iter().enumerate().map(|(i, mut r)| { r.id = format!("r{i}"); r }).collect();
        let total = (a + b + 1) as f64;
        let s = split(records.clone(), [a as f64 / total, b as f64 / total, 1.0 / total], seed).unwrap();
        let mut ids: Vec<String> = [&s.train, &s.dev, &s.test, &s.rest].iter().flat_map(|b| b.iter().map(|r| r.id.clone())).collect();
        ids.sort();
        let mut want: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
        want.sort();
        prop_assert_eq!(ids, want);
        prop_assert!(s.rest.is_empty());
    }

    #[test]
    fn stats_totals_are_column_sums(records in prop::collection::vec(record_strategy(), 0..40)) {
        let s = stats(&records);
        prop_assert_eq!(s.totals.claims, records.len());
        prop_assert_eq!(s.totals.claims, s.per_class.values().map(|c| c.claims).sum::<usize>());
        prop_assert_eq!(s.totals.evidence_docs, s.per_class.values().map(|c| c.evidence_docs).sum::<usize>());
        prop_assert_eq!(s.per_source.values().sum::<usize>(), records.len());
    }
}

#[test]
fn hand_checked_bleu() {
    let cfg = BleuConfig::default();
    let t = |s: &str| fivew_core::textmetrics::tokenize(s, Normalization::NONE);
    // orders 1..=3 (candidate length 3): unigram "the" clipped to 1 of 3,
    // no bigram or trigram overlap so both take epsilon; c = 3 > r = 2, BP = 1
    let expected = (((1.0f64 / 3.0).ln() + 2.0 * 0.01f64.ln()) / 3.0).exp();
    let got = bleu(&t("the the the"), &[t("the cat")], &cfg).unwrap();
    assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
}
