//! 5W question-answer pair generation from semantic-role frames.
//!
//! The template engine is the deterministic reference path: the span
//! extracted for an aspect is swapped for its question word, and the span
//! itself becomes the gold answer. A [`QuestionGenerator`] backend can
//! replace the surface question while the gold answer stays the span.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, QuestionGenerator};
use crate::corpus::ClaimRecord;
use crate::srl5w::{extract_5w, FiveW, MappingTable, RoleSpan, SrlFrame};
use crate::textmetrics::is_punctuation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QaSource {
    Template,
    Generative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiveWQaPair {
    pub claim_id: String,
    pub w: FiveW,
    #[serde(rename = "verb")]
    pub verb_text: String,
    pub question: String,
    pub gold_answer: String,
    pub source: QaSource,
}

#[derive(Debug, Error)]
pub enum QagenError {
    #[error("question generation for claim {claim_id} failed: {source}")]
    Backend { claim_id: String, source: BackendError },
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Turns a declarative string into question form: trailing punctuation is
/// replaced by `?` and the first character is capitalized.
pub fn finish_question(text: &str) -> String {
    let body = text.trim().trim_end_matches(|c: char| is_punctuation(c) || c.is_whitespace());
    capitalize_first(&format!("{body}?"))
}

fn attaches_left(token: &str) -> bool {
    token.chars().all(|c| ",.;:!?)]}%".contains(c))
}

/// Joins tokens with spaces, gluing closing punctuation tokens to their
/// left neighbour.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for token in tokens {
        let token = token.as_ref();
        if !out.is_empty() && !attaches_left(token) {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Builds the template question for `span` of `frame`: the span's tokens are
/// replaced by the question word (capitalized only at sentence start) and
/// everything else is kept verbatim.
pub fn gen_question_template(frame: &SrlFrame, w: FiveW, span: &RoleSpan) -> FiveWQaPair {
    let tokens = frame.tokens().tokens();
    let word = if span.start == 0 { capitalize_first(w.word()) } else { w.word().to_owned() };
    let rewritten: Vec<&str> = tokens[..span.start]
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(word.as_str()))
        .chain(tokens[span.end..].iter().map(String::as_str))
        .collect();
    FiveWQaPair {
        claim_id: frame.claim_id.clone(),
        w,
        verb_text: frame.verb_text().to_owned(),
        question: finish_question(&detokenize(&rewritten)),
        gold_answer: span.text.clone(),
        source: QaSource::Template,
    }
}

/// A pair whose question comes from `backend`. On backend failure the
/// template question is used and a warning returned, unless `strict`.
pub fn gen_question_backend(
    claim: &str,
    frame: &SrlFrame,
    w: FiveW,
    span: &RoleSpan,
    backend: &dyn QuestionGenerator,
    strict: bool,
) -> Result<(FiveWQaPair, Option<String>), QagenError> {
    match backend.question(claim, w, &span.text) {
        Ok(question) => Ok((
            FiveWQaPair {
                claim_id: frame.claim_id.clone(),
                w,
                verb_text: frame.verb_text().to_owned(),
                question,
                gold_answer: span.text.clone(),
                source: QaSource::Generative,
            },
            None,
        )),
        Err(source) if strict => Err(QagenError::Backend { claim_id: frame.claim_id.clone(), source }),
        Err(e) => {
            let warning = format!("claim {}: {w} question fell back to template ({e})", frame.claim_id);
            log::warn!("{warning}");
            Ok((gen_question_template(frame, w, span), Some(warning)))
        }
    }
}

#[derive(Clone, Copy)]
pub enum QagMode<'a> {
    Template,
    Generative { backend: &'a dyn QuestionGenerator, strict: bool },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QagOptions {
    /// Also emit questions for `How` spans.
    pub include_how: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QaGeneration {
    pub pairs: Vec<FiveWQaPair>,
    pub warnings: Vec<String>,
}

/// One pair per frame and aspect present, in frame order then aspect order.
/// Aspects with no mapped span produce nothing.
pub fn generate_qapairs(
    record: &ClaimRecord,
    frames: &[SrlFrame],
    table: &MappingTable,
    mode: QagMode<'_>,
    options: QagOptions,
) -> Result<QaGeneration, QagenError> {
    generate_for_text(&record.id, &record.claim, frames, table, mode, options)
}

/// As [`generate_qapairs`], for any text (a claim or one of its
/// paraphrases) identified by `text_id`.
pub fn generate_for_text(
    text_id: &str,
    text: &str,
    frames: &[SrlFrame],
    table: &MappingTable,
    mode: QagMode<'_>,
    options: QagOptions,
) -> Result<QaGeneration, QagenError> {
    let mut out = QaGeneration::default();
    for frame in frames {
        let extraction = extract_5w(frame, table);
        for c in &extraction.collisions {
            out.warnings.push(format!(
                "claim {text_id}: verb {:?} has two {} spans; kept {:?}, dropped {:?}",
                frame.verb_text(),
                c.w,
                c.kept.text,
                c.discarded.text
            ));
        }
        for (w, span) in &extraction.spans {
            if *w == FiveW::How && !options.include_how {
                continue;
            }
            let mut pair = match mode {
                QagMode::Template => gen_question_template(frame, *w, span),
                QagMode::Generative { backend, strict } => {
                    let (pair, warning) = gen_question_backend(text, frame, *w, span, backend, strict)?;
                    out.warnings.extend(warning);
                    pair
                }
            };
            pair.claim_id = text_id.to_owned();
            out.pairs.push(pair);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{MockQg, ReplayQg};
    use crate::fixtures;
    use crate::srl5w::PropBankRole;
    use crate::textmetrics::{tokenize, Normalization, TokenSeq};

    #[test]
    fn finish_question_rules() {
        assert_eq!(finish_question("ann met whom ."), "Ann met whom?");
        assert_eq!(finish_question("Who ran!"), "Who ran?");
        assert_eq!(finish_question("what"), "What?");
    }

    #[test]
    fn template_show_frame() {
        let frame = fixtures::moderna_show_frame();
        let ex = extract_5w(&frame, &MappingTable::default());
        let pair = gen_question_template(&frame, FiveW::What, &ex.spans[&FiveW::What]);
        assert_eq!(pair.question, "Moderna’s lawsuits against Pfizer-BioNTech show what?");
        assert_eq!(pair.gold_answer, "COVID-19 vaccines were in the works before the pandemic started");
        assert_eq!(pair.verb_text, "show");
        let who = gen_question_template(&frame, FiveW::Who, &ex.spans[&FiveW::Who]);
        assert_eq!(who.question, "Who show COVID-19 vaccines were in the works before the pandemic started?");
    }

    #[test]
    fn template_when_span() {
        let frames = fixtures::moderna_frames();
        let ex = extract_5w(&frames[0], &MappingTable::default());
        let when = gen_question_template(&frames[0], FiveW::When, &ex.spans[&FiveW::When]);
        assert_eq!(when.gold_answer, "before the pandemic");
        assert!(when.question.contains("when"));
        assert!(when.question.ends_with('?'));
    }

    #[test]
    fn template_sentence_initial() {
        let tokens = TokenSeq::from_tokens(["Manning", "joined", "the", "army", "."]).unwrap();
        let frame = SrlFrame::new("m", tokens, 1, [(PropBankRole::Arg0, 0, 1), (PropBankRole::Arg1, 2, 4)]).unwrap();
        let ex = extract_5w(&frame, &MappingTable::default());
        let who = gen_question_template(&frame, FiveW::Who, &ex.spans[&FiveW::Who]);
        assert_eq!(who.question, "Who joined the army?");
        assert_eq!(who.gold_answer, "Manning");
        let what = gen_question_template(&frame, FiveW::What, &ex.spans[&FiveW::What]);
        assert_eq!(what.question, "Manning joined what?");
    }

    #[test]
    fn backend_echo_equals_template() {
        let frame = fixtures::moderna_show_frame();
        let ex = extract_5w(&frame, &MappingTable::default());
        let span = &ex.spans[&FiveW::What];
        let (generated, warning) = gen_question_backend(fixtures::MODERNA_CLAIM, &frame, FiveW::What, span, &MockQg, true).unwrap();
        assert!(warning.is_none());
        assert_eq!(generated.question, gen_question_template(&frame, FiveW::What, span).question);
        assert_eq!(generated.source, QaSource::Generative);
    }

    #[test]
    fn backend_replay_and_fallback() {
        let frame = fixtures::moderna_show_frame();
        let ex = extract_5w(&frame, &MappingTable::default());
        let span = &ex.spans[&FiveW::What];
        let qg = ReplayQg::new().with(FiveW::What, span.text.clone(), "What the lawsuit shows?");
        let (pair, _) = gen_question_backend(fixtures::MODERNA_CLAIM, &frame, FiveW::What, span, &qg, true).unwrap();
        assert_eq!(pair.question, "What the lawsuit shows?");
        assert_eq!(pair.gold_answer, span.text);

        let empty = ReplayQg::new();
        assert!(gen_question_backend(fixtures::MODERNA_CLAIM, &frame, FiveW::What, span, &empty, true).is_err());
        let (pair, warning) = gen_question_backend(fixtures::MODERNA_CLAIM, &frame, FiveW::What, span, &empty, false).unwrap();
        assert_eq!(pair.source, QaSource::Template);
        assert!(warning.is_some());
    }

    #[test]
    fn pairs_for_moderna_claim() {
        let record = fixtures::moderna_record();
        let out = generate_qapairs(&record, &fixtures::moderna_frames(), &MappingTable::default(), QagMode::Template, QagOptions::default())
            .unwrap();
        assert!(out.pairs.len() <= 10);
        let ws: std::collections::BTreeSet<FiveW> = out.pairs.iter().map(|p| p.w).collect();
        assert_eq!(ws.into_iter().collect::<Vec<_>>(), [FiveW::Who, FiveW::What, FiveW::When]);
    }

    #[test]
    fn unmapped_and_exact_count() {
        let tokens = TokenSeq::from_tokens(["Ann", "may", "leave", "soon"]).unwrap();
        let frame = SrlFrame::new("a", tokens, 2, [(PropBankRole::ArgmMod, 1, 2)]).unwrap();
        let mut record = fixtures::moderna_record();
        record.id = "a".into();
        let out = generate_qapairs(&record, &[frame], &MappingTable::default(), QagMode::Template, QagOptions::default()).unwrap();
        assert!(out.pairs.is_empty());

        let tokens = TokenSeq::from_tokens(["Ann", "met", "Bob", "on", "Monday", "."]).unwrap();
        let frame = SrlFrame::new(
            "a",
            tokens,
            1,
            [(PropBankRole::Arg0, 0, 1), (PropBankRole::Arg1, 2, 3), (PropBankRole::ArgmTmp, 3, 5)],
        )
        .unwrap();
        let out = generate_qapairs(&record, &[frame], &MappingTable::default(), QagMode::Template, QagOptions::default()).unwrap();
        assert_eq!(out.pairs.len(), 3);
    }

    #[test]
    fn how_is_opt_in() {
        let tokens = TokenSeq::from_tokens(["Ann", "ran", "quickly"]).unwrap();
        let frame = SrlFrame::new("a", tokens, 1, [(PropBankRole::Arg0, 0, 1), (PropBankRole::ArgmMnr, 2, 3)]).unwrap();
        let mut record = fixtures::moderna_record();
        record.id = "a".into();
        let table = MappingTable::default();
        let default = generate_qapairs(&record, std::slice::from_ref(&frame), &table, QagMode::Template, QagOptions::default()).unwrap();
        assert_eq!(default.pairs.len(), 1);
        let with_how = generate_qapairs(&record, &[frame], &table, QagMode::Template, QagOptions { include_how: true }).unwrap();
        assert_eq!(with_how.pairs.len(), 2);
        assert_eq!(with_how.pairs[1].question, "Ann ran how?");
    }

    #[test]
    fn gold_answers_relocate_in_claim() {
        let record = fixtures::moderna_record();
        let out = generate_qapairs(&record, &fixtures::moderna_frames(), &MappingTable::default(), QagMode::Template, QagOptions::default())
            .unwrap();
        let claim = tokenize(&record.claim, Normalization::WORDS);
        for pair in out.pairs {
            let gold = tokenize(&pair.gold_answer, Normalization::WORDS);
            assert!(claim.tokens().windows(gold.len()).any(|w| w == gold.tokens()), "{}", pair.gold_answer);
        }
    }
}
