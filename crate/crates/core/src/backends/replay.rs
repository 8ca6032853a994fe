//! Backends that serve recorded responses from fixture files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{BackendError, Paraphraser, QuestionAnswerer, QuestionGenerator, RoleLabeler};
use crate::srl5w::{self, FiveW, SrlFrame};
use crate::verdict::AnswerResult;

/// Instruction used to obtain paraphrases from a prompted generator.
pub const PARAPHRASE_PROMPT: &str = "Generate five different paraphrases of the following text and then place all these five paraphrases in one list of python format. Do not write anything other than just the list ";

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BackendError> {
    let content =
        std::fs::read_to_string(path).map_err(|e| BackendError::Fixture(format!("{}: {e}", path.display())))?;
    parse_jsonl(&content).map_err(|e| BackendError::Fixture(format!("{}: {e}", path.display())))
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(content: &str) -> Result<Vec<T>, String> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

/// Extracts the paraphrase list from raw generator output.
///
/// Accepts a bracketed list of quoted strings (single or double quotes,
/// backslash escapes) or numbered lines such as `1. text` / `2) text`.
pub fn parse_paraphrase_list(raw: &str) -> Result<Vec<String>, BackendError> {
    let items = match (raw.find('['), raw.rfind(']')) {
        (Some(open), Some(close)) if open < close => parse_quoted_items(&raw[open + 1..close]),
        _ => parse_numbered(raw),
    };
    if items.is_empty() {
        return Err(BackendError::Fixture(format!("no paraphrase list in output {raw:?}")));
    }
    Ok(items)
}

fn parse_quoted_items(body: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c != '\'' && c != '"' {
            continue;
        }
        let quote = c;
        let mut item = String::new();
        while let Some(c) = chars.next() {
            match c {
                '\\' => {
                    if let Some(escaped) = chars.next() {
                        item.push(match escaped {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                    }
                }
                c if c == quote => break,
                c => item.push(c),
            }
        }
        let item = item.trim();
        if !item.is_empty() {
            items.push(item.to_owned());
        }
    }
    items
}

fn parse_numbered(raw: &str) -> Vec<String> {
    raw.lines()
        .filter_map(|line| {
            let line = line.trim();
            let digits = line.chars().take_while(char::is_ascii_digit).count();
            if digits == 0 {
                return None;
            }
            let rest = line[digits..].strip_prefix(['.', ')', ':'])?.trim();
            let rest = rest.trim_matches(|c| c == '"' || c == '\'').trim();
            (!rest.is_empty()).then(|| rest.to_owned())
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct TranscriptEntry {
    text: String,
    output: String,
}

/// Serves recorded generator transcripts keyed by input text.
#[derive(Debug, Clone, Default)]
pub struct ReplayParaphraser {
    outputs: BTreeMap<String, Vec<String>>,
}

impl ReplayParaphraser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records raw generator output for `text`.
    pub fn record(&mut self, text: impl Into<String>, raw_output: &str) -> Result<(), BackendError> {
        self.outputs.insert(text.into(), parse_paraphrase_list(raw_output)?);
        Ok(())
    }

    /// Loads a transcript file of `{"text": ..., "output": ...}` lines.
    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let mut replay = ReplayParaphraser::new();
        for entry in read_jsonl::<TranscriptEntry>(path)? {
            replay.record(entry.text, &entry.output)?;
        }
        Ok(replay)
    }
}

impl Paraphraser for ReplayParaphraser {
    fn paraphrase(&self, text: &str, n: usize) -> Result<Vec<String>, BackendError> {
        let outputs = self.outputs.get(text).ok_or_else(|| BackendError::NotRecorded(format!("paraphrases of {text:?}")))?;
        Ok(outputs.iter().take(n).cloned().collect())
    }
}

#[derive(Debug, Deserialize)]
struct ScriptedAnswer {
    question: String,
    answer: String,
    #[serde(default)]
    score: f64,
}

/// Question answering from a script of `question -> (answer, score)`.
/// Unscripted questions get no answer.
#[derive(Debug, Clone, Default)]
pub struct ScriptedQa {
    script: BTreeMap<String, (String, f64)>,
}

impl ScriptedQa {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, question: impl Into<String>, answer: impl Into<String>, score: f64) -> Self {
        self.script.insert(question.into(), (answer.into(), score));
        self
    }

    /// Loads `{"question": ..., "answer": ..., "score": ...}` lines.
    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        Ok(read_jsonl::<ScriptedAnswer>(path)?
            .into_iter()
            .fold(ScriptedQa::new(), |qa, a| qa.with(a.question, a.answer, a.score)))
    }
}

impl QuestionAnswerer for ScriptedQa {
    fn answer(&self, question: &str, passages: &[String]) -> Result<AnswerResult, BackendError> {
        match self.script.get(question) {
            Some((answer, score)) if !passages.is_empty() => Ok(AnswerResult {
                question: question.to_owned(),
                answer_text: answer.clone(),
                confidence: *score,
            }),
            _ => Ok(AnswerResult::no_answer(question)),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RecordedQuestion {
    w: FiveW,
    answer_span: String,
    question: String,
}

/// Serves recorded questions keyed by `(W, answer span)`.
#[derive(Debug, Clone, Default)]
pub struct ReplayQg {
    questions: BTreeMap<(FiveW, String), String>,
}

impl ReplayQg {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, w: FiveW, answer_span: impl Into<String>, question: impl Into<String>) -> Self {
        self.questions.insert((w, answer_span.into()), question.into());
        self
    }

    /// Loads `{"w": "What", "answer_span": ..., "question": ...}` lines.
    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        Ok(read_jsonl::<RecordedQuestion>(path)?
            .into_iter()
            .fold(ReplayQg::new(), |qg, r| qg.with(r.w, r.answer_span, r.question)))
    }
}

impl QuestionGenerator for ReplayQg {
    fn question(&self, _claim: &str, w: FiveW, answer_span: &str) -> Result<String, BackendError> {
        self.questions
            .get(&(w, answer_span.to_owned()))
            .cloned()
            .ok_or_else(|| BackendError::NotRecorded(format!("{w} question for {answer_span:?}")))
    }
}

/// Serves frames from a frame file, looked up by claim id.
#[derive(Debug, Clone, Default)]
pub struct ReplaySrl {
    frames: BTreeMap<String, Vec<SrlFrame>>,
}

impl ReplaySrl {
    pub fn new(frames: Vec<SrlFrame>) -> Self {
        ReplaySrl { frames: srl5w::group_by_claim(frames) }
    }

    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let content =
            std::fs::read_to_string(path).map_err(|e| BackendError::Fixture(format!("{}: {e}", path.display())))?;
        let frames = srl5w::parse_frames(&content).map_err(|e| BackendError::Fixture(e.to_string()))?;
        Ok(ReplaySrl::new(frames))
    }
}

impl RoleLabeler for ReplaySrl {
    fn label(&self, claim_id: &str, _text: &str) -> Result<Vec<SrlFrame>, BackendError> {
        self.frames.get(claim_id).cloned().ok_or_else(|| BackendError::NotRecorded(format!("frames for {claim_id}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bracketed_list() {
        let raw = r#"["One's first.", 'Two, with comma', "Three \"quoted\""]"#;
        assert_eq!(parse_paraphrase_list(raw).unwrap(), ["One's first.", "Two, with comma", "Three \"quoted\""]);
    }

    #[test]
    fn numbered_lines() {
        let raw = "Here you go:\n1. First one.\n2) Second one.\n3: \"Third\"\n";
        assert_eq!(parse_paraphrase_list(raw).unwrap(), ["First one.", "Second one.", "Third"]);
        assert!(parse_paraphrase_list("I cannot help with that.").is_err());
    }

    #[test]
    fn faq_transcript_replay() {
        let mut replay = ReplayParaphraser::new();
        replay.record(fixtures::MODERNA_CLAIM, &fixtures::gpt3_transcript_output()).unwrap();
        let out = replay.paraphrase(fixtures::MODERNA_CLAIM, 5).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out, fixtures::MODERNA_PARAPHRASES);
        assert_eq!(replay.paraphrase(fixtures::MODERNA_CLAIM, 3).unwrap().len(), 3);
        assert!(replay.paraphrase("unseen", 5).is_err());
    }

    #[test]
    fn scripted_qa_and_replay_qg() {
        let qa = ScriptedQa::new().with("Q?", "A", 0.7);
        let ctx = vec!["passage".to_owned()];
        assert_eq!(qa.answer("Q?", &ctx).unwrap().answer_text, "A");
        assert!(qa.answer("Q?", &[]).unwrap().answer_text.is_empty());
        assert!(qa.answer("Other?", &ctx).unwrap().answer_text.is_empty());

        let qg = ReplayQg::new().with(FiveW::What, "x", "What x?");
        assert_eq!(qg.question("c", FiveW::What, "x").unwrap(), "What x?");
        assert!(qg.question("c", FiveW::Who, "x").is_err());
    }
}
