//! Deterministic fixtures: the worked Moderna example and seeded synthetic
//! corpora. Used by the tests, the acceptance suite and the guide.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backends::{NliLabel, ScriptedQa};
use crate::corpus::{ClaimRecord, EntailmentClass, EvidencePassage, SourceTag};
use crate::paraphrase::{score_diversity, CandidateStatus, ParaphraseCandidate};
use crate::qagen::{detokenize, generate_qapairs, FiveWQaPair, QaSource, QagMode, QagOptions};
use crate::srl5w::{FiveW, MappingTable, PropBankRole, SrlFrame};
use crate::textmetrics::{tokenize, InvBleuConfig, Normalization, TokenSeq};
use crate::verdict::{paraphrase_text_id, Verdict};

pub const MODERNA_ID: &str = "factify2-moderna";

pub const MODERNA_CLAIM: &str =
    "Moderna’s lawsuits against Pfizer-BioNTech show COVID-19 vaccines were in the works before the pandemic started.";

pub const MODERNA_PARAPHRASES: [&str; 5] = [
    "Moderna's legal action against Pfizer-BioNTech demonstrates that work was being done on COVID-19 vaccines prior to the outbreak of the pandemic.",
    "Moderna's legal action against Pfizer-BioNTech implies that work on COVID-19 vaccines had begun prior to the beginning of the pandemic.",
    "Moderna's court cases against Pfizer-BioNTech indicate that COVID-19 vaccines had been in development before the pandemic began.",
    "Moderna's prosecution against Pfizer-BioNTech demonstrates that COVID-19 vaccines had been in advancement prior to the pandemic commencing.",
    "It is revealed by Moderna's legal actions addressed to Pfizer-BioNTech that work on COVID-19 vaccines was being done before the pandemic began.",
];

const MODERNA_EVIDENCE: [&str; 4] = [
    "Moderna is suing Pfizer and BioNTech for patent infringement, alleging the rival companies used key parts of its mRNA technology to develop their COVID-19 vaccine. Moderna’s patents were filed between 2010 and 2016.",
    "Although the patents existed before the pandemic began, this does not mean Moderna or Pfizer-BioNTech were already working on the COVID-19 vaccine. Scientists have used mRNA technology to study other viruses, such as the flu, Zika and rabies.",
    "Moderna and Pfizer-BioNTech both used messenger RNA technology, or mRNA technology, to develop their COVID-19 vaccines.",
    "This technology dates back to the 1990s, but the first time mRNA vaccines were widely disseminated was to combat the spread of COVID-19.",
];

/// Raw generator output for the Moderna claim: a bracketed list, as the
/// paraphrasing prompt asks for.
pub fn gpt3_transcript_output() -> String {
    let items: Vec<String> = MODERNA_PARAPHRASES.iter().map(|p| format!("{p:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn moderna_tokens() -> TokenSeq {
    tokenize(
        "Moderna’s lawsuits against Pfizer-BioNTech show COVID-19 vaccines were in the works before the pandemic started .",
        Normalization::NONE,
    )
}

/// The two verb frames of the Moderna claim, for `were` and `started`.
pub fn moderna_frames() -> Vec<SrlFrame> {
    use PropBankRole::*;
    vec![
        SrlFrame::new(MODERNA_ID, moderna_tokens(), 7, [(Arg0, 0, 4), (Arg1, 5, 7), (Arg2, 8, 11), (ArgmTmp, 11, 14)])
            .expect("valid frame"),
        SrlFrame::new(MODERNA_ID, moderna_tokens(), 14, [(Arg1, 12, 14)]).expect("valid frame"),
    ]
}

/// A frame for the main verb `show`.
pub fn moderna_show_frame() -> SrlFrame {
    use PropBankRole::*;
    SrlFrame::new(MODERNA_ID, moderna_tokens(), 4, [(Arg0, 0, 4), (Arg1, 5, 15)]).expect("valid frame")
}

/// [`moderna_frames`] in frame-file form.
pub fn moderna_frame_file() -> String {
    moderna_frames().iter().map(|f| serde_json::to_string(&f.to_record()).expect("serializable") + "\n").collect()
}

pub fn moderna_evidence_texts() -> Vec<String> {
    MODERNA_EVIDENCE.iter().map(|s| s.to_string()).collect()
}

/// The Moderna claim with its evidence and template QA pairs.
pub fn moderna_record() -> ClaimRecord {
    let mut record = ClaimRecord::new(MODERNA_ID, SourceTag::Factify2, MODERNA_CLAIM, EntailmentClass::Refute);
    record.evidence = MODERNA_EVIDENCE.iter().map(|t| EvidencePassage::new(*t)).collect();
    record.qa_pairs = generate_qapairs(
        &record,
        &moderna_frames(),
        &MappingTable::default(),
        QagMode::Template,
        QagOptions::default(),
    )
    .expect("template generation is infallible")
    .pairs;
    record
}

/// Scripted answers keyed by gold span: (answer, confidence).
fn moderna_answers() -> [(&'static str, &'static str, f64); 4] {
    [
        ("Moderna’s lawsuits against Pfizer-BioNTech", "Moderna lawsuits against Pfizer-BioNTech", 0.92),
        (
            "COVID-19 vaccines",
            "this does not mean Moderna or Pfizer-BioNTech were already working on the COVID-19 vaccine",
            0.81,
        ),
        ("the pandemic", "to combat the spread of COVID-19", 0.44),
        ("before the pandemic", "between 2010 and 2016", 0.77),
    ]
}

fn moderna_script() -> Vec<(String, String, f64)> {
    let answers = moderna_answers();
    moderna_record()
        .qa_pairs
        .iter()
        .filter_map(|p| {
            answers.iter().find(|(gold, _, _)| *gold == p.gold_answer).map(|(_, a, s)| (p.question.clone(), a.to_string(), *s))
        })
        .collect()
}

/// A scripted answerer over the Moderna questions.
pub fn moderna_scripted_qa() -> ScriptedQa {
    moderna_script().into_iter().fold(ScriptedQa::new(), |qa, (q, a, s)| qa.with(q, a, s))
}

/// The same script as a `{question, answer, score}` file.
pub fn moderna_qa_script_jsonl() -> String {
    moderna_script()
        .into_iter()
        .map(|(q, a, s)| serde_json::json!({"question": q, "answer": a, "score": s}).to_string() + "\n")
        .collect()
}

/// Verified true for Who, false for What and When, nothing to check for
/// Where and Why.
pub fn moderna_expected_pattern() -> BTreeMap<FiveW, Verdict> {
    BTreeMap::from([
        (FiveW::Who, Verdict::Supported),
        (FiveW::What, Verdict::Refuted),
        (FiveW::When, Verdict::Refuted),
        (FiveW::Where, Verdict::NotVerifiable),
        (FiveW::Why, Verdict::NotVerifiable),
    ])
}

const WHO: [&[&str]; 6] = [
    &["Ann"],
    &["The", "council"],
    &["Maria", "Lopez"],
    &["A", "local", "farmer"],
    &["The", "health", "ministry"],
    &["Bob"],
];
const VERBS: [(&str, &str); 6] = [
    ("opened", "inaugurated"),
    ("closed", "shut"),
    ("visited", "toured"),
    ("funded", "financed"),
    ("criticized", "condemned"),
    ("praised", "lauded"),
];
const WHAT: [&[&str]; 6] = [
    &["the", "bridge"],
    &["a", "new", "hospital"],
    &["the", "old", "factory"],
    &["the", "research", "lab"],
    &["a", "public", "library"],
    &["the", "harbor"],
];
const WHERE: [&[&str]; 4] = [&["in", "Paris"], &["in", "Lagos"], &["near", "the", "river"], &["in", "the", "capital"]];
const WHEN: [&[&str]; 4] = [&["on", "Monday"], &["in", "2019"], &["last", "week"], &["before", "the", "election"]];
const WHY: [&[&str]; 2] = [&["because", "of", "budget", "cuts"], &["due", "to", "public", "pressure"]];

/// Lexicon file (`syn`/`ant` lines) covering the synthetic vocabulary, so
/// lexicon mocks can paraphrase and entail synthetic claims.
pub const SYNTHETIC_LEXICON: &str = "syn\topened\tinaugurated|unveiled
syn\tclosed\tshut|sealed
syn\tvisited\ttoured|inspected
syn\tfunded\tfinanced|bankrolled
syn\tcriticized\tcondemned|faulted
syn\tpraised\tlauded|commended
syn\tbridge\tcrossing|span
syn\thospital\tclinic|infirmary
syn\tfactory\tplant|mill
syn\tlab\tlaboratory|facility
syn\tlibrary\tarchive|reading-room
syn\tharbor\tport|dock
syn\tcouncil\tassembly|board
syn\tministry\tdepartment|office
syn\tfarmer\tgrower|rancher
syn\tcapital\tmetropolis|seat
syn\triver\tstream|waterway
syn\tweek\tsennight|seven-day stretch
syn\telection\tvote|poll
syn\tpressure\tdemand|push
syn\tcuts\treductions|trims
ant\topened\tclosed
ant\tpraised\tcriticized
";

/// Number of distinct synthetic sentences.
pub const SYNTHETIC_SPACE: usize = 6 * 6 * 6 * 5 * 5 * 3;

/// A generated claim sentence with its single verb frame.
#[derive(Debug, Clone)]
pub struct SyntheticClaim {
    pub tokens: Vec<String>,
    pub verb_index: usize,
    pub spans: Vec<(PropBankRole, usize, usize)>,
    pub verb_synonym: &'static str,
}

impl SyntheticClaim {
    /// Decodes one of the [`SYNTHETIC_SPACE`] sentences.
    pub fn nth(mut n: usize) -> SyntheticClaim {
        let mut digit = |base: usize| {
            let d = n % base;
            n /= base;
            d
        };
        let (who, verb, what) = (digit(6), digit(6), digit(6));
        let (place, time, reason) = (digit(5), digit(5), digit(3));
        let mut tokens: Vec<String> = Vec::new();
        let mut spans = Vec::new();
        let mut push = |tokens: &mut Vec<String>, role: PropBankRole, words: &[&str]| {
            spans.push((role, tokens.len(), tokens.len() + words.len()));
            tokens.extend(words.iter().map(|w| w.to_string()));
        };
        push(&mut tokens, PropBankRole::Arg0, WHO[who]);
        let verb_index = tokens.len();
        tokens.push(VERBS[verb].0.to_owned());
        push(&mut tokens, PropBankRole::Arg1, WHAT[what]);
        if place > 0 {
            push(&mut tokens, PropBankRole::ArgmLoc, WHERE[place - 1]);
        }
        if time > 0 {
            push(&mut tokens, PropBankRole::ArgmTmp, WHEN[time - 1]);
        }
        if reason > 0 {
            push(&mut tokens, PropBankRole::ArgmCau, WHY[reason - 1]);
        }
        tokens.push(".".to_owned());
        SyntheticClaim { tokens, verb_index, spans, verb_synonym: VERBS[verb].1 }
    }

    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }

    pub fn frame(&self, id: &str) -> SrlFrame {
        SrlFrame::new(id, TokenSeq::from_tokens(self.tokens.clone()).expect("valid tokens"), self.verb_index, self.spans.clone())
            .expect("valid frame")
    }

    /// "Reports say ..." with the verb swapped for its synonym: three word
    /// edits away from the claim.
    pub fn paraphrase(&self) -> SyntheticClaim {
        let mut tokens = vec!["Reports".to_owned(), "say".to_owned()];
        for (i, t) in self.tokens.iter().enumerate() {
            tokens.push(match i {
                0 if t == "The" || t == "A" => t.to_lowercase(),
                i if i == self.verb_index => self.verb_synonym.to_owned(),
                _ => t.clone(),
            });
        }
        SyntheticClaim {
            tokens,
            verb_index: self.verb_index + 2,
            spans: self.spans.iter().map(|&(r, s, e)| (r, s + 2, e + 2)).collect(),
            verb_synonym: self.verb_synonym,
        }
    }
}

/// `n` distinct synthetic claims chosen by a seeded generator.
pub fn synthetic_claims(n: usize, seed: u64) -> Vec<SyntheticClaim> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, SYNTHETIC_SPACE, n).into_iter().map(SyntheticClaim::nth).collect()
}

/// Frames keyed by text id.
pub type FrameMap = BTreeMap<String, Vec<SrlFrame>>;

/// Records whose evidence contains the claim and its one kept paraphrase
/// verbatim, with frames for both. An extractive answerer recovers every
/// gold span exactly on this fixture.
pub fn grid_fixture(n: usize, seed: u64) -> (Vec<ClaimRecord>, FrameMap) {
    let mut frames = FrameMap::new();
    let records = synthetic_claims(n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, claim)| {
            let id = format!("other-{i}");
            let para = claim.paraphrase();
            let mut record = ClaimRecord::new(&id, SourceTag::Other, claim.text(), EntailmentClass::ALL[i % 3]);
            record.evidence = vec![EvidencePassage::new(claim.text()), EvidencePassage::new(para.text())];
            let mut candidates = vec![ParaphraseCandidate {
                claim_id: id.clone(),
                index: 1,
                text: para.text(),
                med_to_claim: 3,
                nli_label: Some(NliLabel::Entailment),
                diversity_d: None,
                status: CandidateStatus::Kept,
            }];
            score_diversity(&record.claim, &mut candidates, &InvBleuConfig::default()).expect("non-empty texts");
            record.paraphrases = candidates;
            frames.insert(id.clone(), vec![claim.frame(&id)]);
            let pid = paraphrase_text_id(&id, 1);
            frames.insert(pid.clone(), vec![para.frame(&pid)]);
            record
        })
        .collect();
    (records, frames)
}

/// Records with varied evidence: a support claim's evidence restates it
/// inside a longer sentence, a neutral claim's evidence is unrelated, and
/// a refute claim's evidence swaps the object. Template QA pairs are
/// attached.
pub fn synthetic_corpus(n: usize, seed: u64) -> (Vec<ClaimRecord>, FrameMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut frames = FrameMap::new();
    let records = synthetic_claims(n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, claim)| {
            let id = format!("other-{i}");
            let label = EntailmentClass::ALL[rng.random_range(0..3)];
            let mut record = ClaimRecord::new(&id, SourceTag::Other, claim.text(), label);
            let body = detokenize(&claim.tokens[..claim.tokens.len() - 1]);
            let evidence = match label {
                EntailmentClass::Support => {
                    let padding = ["", "officials said", "according to a statement from the city press office"]
                        [rng.random_range(0..3)];
                    format!("{body} {padding}.").replace(" .", ".")
                }
                EntailmentClass::Neutral => "The weather stayed mild for most of the season.".to_owned(),
                EntailmentClass::Refute => {
                    let other = WHAT[rng.random_range(0..WHAT.len())].join(" ");
                    let (_, s, e) = claim.spans[1];
                    let mut t = claim.tokens.clone();
                    t.splice(s..e, [other]);
                    detokenize(&t)
                }
            };
            record.evidence = vec![EvidencePassage::new(evidence)];
            let frame = claim.frame(&id);
            record.qa_pairs = generate_qapairs(
                &record,
                std::slice::from_ref(&frame),
                &MappingTable::default(),
                QagMode::Template,
                QagOptions::default(),
            )
            .expect("template generation is infallible")
            .pairs;
            frames.insert(id, vec![frame]);
            record
        })
        .collect();
    (records, frames)
}

/// Per-class (claims, kept paraphrases, QA pairs, distinct evidence
/// documents) at one ten-thousandth of the full corpus.
pub const SCALED_CLASS_COUNTS: [(EntailmentClass, [usize; 4]); 3] = [
    (EntailmentClass::Support, [22, 99, 46, 22]),
    (EntailmentClass::Neutral, [8, 37, 19, 5]),
    (EntailmentClass::Refute, [9, 38, 24, 9]),
];

fn spread(total: usize, slots: usize, slot: usize) -> usize {
    total / slots + usize::from(slot < total % slots)
}

/// A corpus whose statistics are exactly [`SCALED_CLASS_COUNTS`]. Each record
/// also carries one dropped paraphrase, which must not be counted.
pub fn scaled_class_corpus() -> Vec<ClaimRecord> {
    let claims = synthetic_claims(SCALED_CLASS_COUNTS.iter().map(|(_, c)| c[0]).sum(), 1);
    let mut out = Vec::new();
    let mut next = 0;
    for (class, [n, paras, pairs, docs]) in SCALED_CLASS_COUNTS {
        for k in 0..n {
            let claim = &claims[next];
            let id = format!("other-{next}");
            next += 1;
            let mut record = ClaimRecord::new(&id, SourceTag::ALL[k % 6], claim.text(), class);
            let doc = k % docs;
            record.evidence = vec![EvidencePassage::with_key(
                format!("{class}-doc-{doc}"),
                format!("Evidence document {doc} for {class} claims."),
            )];
            let kept = spread(paras, n, k);
            record.paraphrases = (0..=kept)
                .map(|j| ParaphraseCandidate {
                    claim_id: id.clone(),
                    index: j + 1,
                    text: format!("Paraphrase {j} of {}", claim.text()),
                    med_to_claim: 3,
                    nli_label: Some(if j < kept { NliLabel::Entailment } else { NliLabel::Neutral }),
                    diversity_d: (j < kept).then_some(1.5),
                    status: if j < kept { CandidateStatus::Kept } else { CandidateStatus::DroppedCorrectness },
                })
                .collect();
            record.qa_pairs = (0..spread(pairs, n, k))
                .map(|j| FiveWQaPair {
                    claim_id: id.clone(),
                    w: FiveW::FIVE[j % 5],
                    verb_text: claim.tokens[claim.verb_index].clone(),
                    question: format!("Question {j}?"),
                    gold_answer: claim.tokens[0].clone(),
                    source: QaSource::Template,
                })
                .collect();
            out.push(record);
        }
    }
    out
}

/// Two source collections where 64 of the second's claims repeat claims
/// of the first up to case and spacing.
pub fn overlap_fixture() -> (Vec<ClaimRecord>, Vec<ClaimRecord>) {
    let claims = synthetic_claims(116, 64);
    let fever: Vec<ClaimRecord> = claims[..100]
        .iter()
        .enumerate()
        .map(|(i, c)| ClaimRecord::new(format!("fever-{i}"), SourceTag::Fever, c.text(), EntailmentClass::ALL[i % 3]))
        .collect();
    let vitc = (0..80)
        .map(|i| {
            let text = if i < 64 {
                let t = fever[i].claim.to_uppercase();
                if i % 2 == 0 { format!("  {}", t.replace(' ', "   ")) } else { t }
            } else {
                claims[100 + i - 64].text()
            };
            ClaimRecord::new(format!("vitc-{i}"), SourceTag::Vitc, text, EntailmentClass::ALL[i % 3])
        })
        .collect();
    (fever, vitc)
}

/// Source-file lines in the generic ingestion format. The `source-` id
/// prefix is removed since ingestion adds it back.
pub fn to_source_jsonl(records: &[ClaimRecord]) -> String {
    records
        .iter()
        .map(|r| {
            let local = r.id.strip_prefix(&format!("{}-", r.source)).unwrap_or(&r.id);
            let evidence: Vec<_> =
                r.evidence.iter().map(|e| serde_json::json!({"doc_key": e.doc_key, "text": e.text})).collect();
            serde_json::json!({
                "id": local,
                "source": r.source.name(),
                "claim": r.claim,
                "label": r.label.name(),
                "evidence": evidence,
            })
            .to_string()
                + "\n"
        })
        .collect()
}

/// A frame file holding every frame of `frames`.
pub fn frame_file(frames: &FrameMap) -> String {
    frames
        .values()
        .flatten()
        .map(|f| serde_json::to_string(&f.to_record()).expect("serializable") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmetrics::med;

    #[test]
    fn moderna_tokens_rebuild_claim() {
        assert_eq!(detokenize(moderna_tokens().tokens()), MODERNA_CLAIM);
        let f = moderna_frames();
        assert_eq!(f[0].verb_text(), "were");
        assert_eq!(f[1].verb_text(), "started");
    }

    #[test]
    fn synthetic_claims_are_distinct_and_valid() {
        let claims = synthetic_claims(300, 3);
        let texts: std::collections::HashSet<String> = claims.iter().map(SyntheticClaim::text).collect();
        assert_eq!(texts.len(), 300);
        for c in &claims {
            let p = c.paraphrase();
            let a = tokenize(&c.text(), Normalization::WORDS);
            let b = tokenize(&p.text(), Normalization::WORDS);
            assert_eq!(med(&a, &b), 3, "{} / {}", c.text(), p.text());
            c.frame("x");
            p.frame("y");
        }
    }

    #[test]
    fn scaled_class_fixture_shape() {
        let records = scaled_class_corpus();
        assert_eq!(records.len(), 39);
    }

    #[test]
    fn overlap_fixture_shape() {
        let (fever, vitc) = overlap_fixture();
        assert_eq!((fever.len(), vitc.len()), (100, 80));
    }
}
