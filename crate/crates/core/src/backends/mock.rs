//! Deterministic rule-based stand-ins for the neural backends.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{BackendError, NliLabel, NliModel, NliOutput, Paraphraser, QuestionAnswerer, QuestionGenerator};
use crate::qagen::finish_question;
use crate::srl5w::FiveW;
use crate::textmetrics::{is_punctuation, tokenize, Normalization};
use crate::verdict::AnswerResult;

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "of", "to", "in", "on", "at", "by", "for", "with", "from", "as", "is",
    "are", "was", "were", "be", "been", "being", "it", "its", "this", "that", "these", "those", "has", "have",
    "had", "do", "does", "did", "not", "no", "so", "than", "then", "there", "their", "they", "he", "she", "his",
    "her", "we", "our", "you", "your", "i", "me", "my", "into", "about", "over", "after", "before", "will",
    "would", "can", "could", "should", "may", "might", "also", "which", "who", "whom", "what", "when", "where",
    "why", "how",
];

fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}

/// Casefolded, punctuation-stripped tokens of `text` minus stopwords and
/// question words.
pub fn content_words(text: &str) -> BTreeSet<String> {
    tokenize(text, Normalization::WORDS)
        .tokens()
        .iter()
        .filter(|t| !is_stopword(t))
        .cloned()
        .collect()
}

/// Substitution and antonym lists driving the paraphrase and NLI mocks.
///
/// File form is tab-separated, one entry per line:
/// `syn<TAB>word<TAB>alt1|alt2|...` or `ant<TAB>word<TAB>opposite`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    synonyms: BTreeMap<String, Vec<String>>,
    antonyms: BTreeSet<(String, String)>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// A small general-purpose lexicon used when no fixture is given.
    pub fn builtin() -> Self {
        let mut lex = Lexicon::new();
        for (word, alts) in [
            ("show", &["demonstrate", "indicate", "reveal"][..]),
            ("shows", &["demonstrates", "indicates", "reveals"]),
            ("lawsuits", &["legal actions", "court cases"]),
            ("lawsuit", &["legal action", "court case"]),
            ("started", &["began", "commenced"]),
            ("before", &["prior to", "ahead of"]),
            ("works", &["pipeline", "making"]),
            ("big", &["large", "huge"]),
            ("small", &["little", "tiny"]),
            ("said", &["stated", "claimed"]),
            ("says", &["states", "claims"]),
            ("people", &["individuals", "persons"]),
            ("quickly", &["rapidly", "swiftly"]),
            ("help", &["assist", "aid"]),
            ("buy", &["purchase", "acquire"]),
            ("begin", &["start", "commence"]),
            ("end", &["finish", "conclude"]),
            ("country", &["nation", "state"]),
            ("city", &["town", "municipality"]),
            ("increase", &["rise", "growth"]),
        ] {
            lex.add_synonyms(word, alts.iter().copied());
        }
        for (a, b) in [("true", "false"), ("increase", "decrease"), ("before", "after"), ("won", "lost"), ("alive", "dead")] {
            lex.add_antonym(a, b);
        }
        lex
    }

    pub fn add_synonyms<I, S>(&mut self, word: &str, alternatives: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.synonyms
            .entry(word.to_lowercase())
            .or_default()
            .extend(alternatives.into_iter().map(Into::into));
    }

    pub fn add_antonym(&mut self, a: &str, b: &str) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        self.antonyms.insert((a.clone(), b.clone()));
        self.antonyms.insert((b, a));
    }

    pub fn parse(content: &str) -> Result<Self, BackendError> {
        let mut lex = Lexicon::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            match cols.as_slice() {
                ["syn", word, alts] => lex.add_synonyms(word, alts.split('|').map(str::trim).filter(|a| !a.is_empty())),
                ["ant", a, b] => lex.add_antonym(a, b),
                _ => return Err(BackendError::Fixture(format!("lexicon line {}: expected syn/ant entry", i + 1))),
            }
        }
        Ok(lex)
    }

    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Fixture(format!("{}: {e}", path.display())))?;
        Lexicon::parse(&content)
    }

    pub fn alternatives(&self, word: &str) -> Option<&[String]> {
        self.synonyms.get(word).map(Vec::as_slice)
    }

    /// Words the lexicon treats as interchangeable with `word`, in either
    /// direction of a synonym entry.
    fn equivalents(&self, word: &str) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for (key, alts) in &self.synonyms {
            let alt_words = alts.iter().flat_map(|a| a.split_whitespace());
            if key == word {
                out.extend(alt_words);
            } else if alts.iter().any(|a| a.split_whitespace().any(|w| w == word)) {
                out.insert(key.as_str());
            }
        }
        out
    }

    fn are_antonyms(&self, a: &str, b: &str) -> bool {
        self.antonyms.contains(&(a.to_owned(), b.to_owned()))
    }
}

/// Splits a whitespace token into leading punctuation, core, trailing
/// punctuation.
fn split_punct(token: &str) -> (&str, &str, &str) {
    let core_start = token.find(|c: char| !is_punctuation(c)).unwrap_or(token.len());
    let core_end = token.rfind(|c: char| !is_punctuation(c)).map_or(core_start, |i| {
        i + token[i..].chars().next().map_or(0, char::len_utf8)
    });
    (&token[..core_start], &token[core_start..core_end.max(core_start)], &token[core_end.max(core_start)..])
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Paraphrases by scripted lexicon substitution.
///
/// Variant `i` (1-based) rotates every substitutable token through
/// "original, alt1, alt2, ..." with offset `i - 1 + position`. A claim with
/// nothing to substitute is echoed with three sentinel tokens appended, so
/// its word edit distance to the claim is exactly 3.
#[derive(Debug, Clone, Default)]
pub struct MockParaphraser {
    lexicon: Lexicon,
}

impl MockParaphraser {
    pub fn new(lexicon: Lexicon) -> Self {
        MockParaphraser { lexicon }
    }

    fn variant(&self, tokens: &[&str], applicable: &[usize], i: usize) -> String {
        let mut out: Vec<String> = tokens.iter().map(|t| (*t).to_owned()).collect();
        for (j, &pos) in applicable.iter().enumerate() {
            let (lead, core, trail) = split_punct(tokens[pos]);
            let alts = self.lexicon.alternatives(&core.to_lowercase()).expect("applicable token has alternatives");
            let choice = (i - 1 + j) % (alts.len() + 1);
            if choice == 0 {
                continue;
            }
            let alt = &alts[choice - 1];
            let alt = if core.chars().next().is_some_and(char::is_uppercase) { capitalize(alt) } else { alt.clone() };
            out[pos] = format!("{lead}{alt}{trail}");
        }
        out.join(" ")
    }
}

impl Paraphraser for MockParaphraser {
    fn paraphrase(&self, text: &str, n: usize) -> Result<Vec<String>, BackendError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let applicable: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| self.lexicon.alternatives(&split_punct(t).1.to_lowercase()).is_some())
            .map(|(i, _)| i)
            .collect();
        Ok((1..=n)
            .map(|i| {
                if applicable.is_empty() {
                    format!("{} alt{i}a alt{i}b alt{i}c", tokens.join(" "))
                } else {
                    self.variant(&tokens, &applicable, i)
                }
            })
            .collect())
    }
}

/// Content-word containment NLI.
///
/// Contradiction when a lexicon antonym pair spans premise and hypothesis;
/// entailment when every hypothesis content word occurs in the premise or is
/// a lexicon equivalent of a premise word; neutral otherwise. Scores are
/// one-hot on the label.
#[derive(Debug, Clone, Default)]
pub struct MockNli {
    lexicon: Lexicon,
}

impl MockNli {
    pub fn new(lexicon: Lexicon) -> Self {
        MockNli { lexicon }
    }

    pub fn decide(&self, premise: &str, hypothesis: &str) -> NliLabel {
        let p = content_words(premise);
        let h = content_words(hypothesis);
        let contradiction = p.iter().any(|a| h.iter().any(|b| self.lexicon.are_antonyms(a, b)));
        if contradiction {
            return NliLabel::Contradiction;
        }
        let covered = |word: &String| p.contains(word) || p.iter().any(|pw| self.lexicon.equivalents(pw).contains(word.as_str()));
        if h.iter().all(covered) {
            NliLabel::Entailment
        } else {
            NliLabel::Neutral
        }
    }
}

impl NliModel for MockNli {
    fn classify(&self, premise: &str, hypothesis: &str) -> Result<NliOutput, BackendError> {
        let label = self.decide(premise, hypothesis);
        let scores = match label {
            NliLabel::Entailment => [1.0, 0.0, 0.0],
            NliLabel::Neutral => [0.0, 1.0, 0.0],
            NliLabel::Contradiction => [0.0, 0.0, 1.0],
        };
        Ok(NliOutput { label, scores })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaMode {
    /// Answer with the whole matching sentence.
    Sentence,
    /// Answer with the part of the matching sentence the question does not
    /// share as a common prefix or suffix.
    Extractive,
}

/// Sentence-matching question answering.
///
/// The answer comes from the first evidence sentence containing every
/// content word of the question; confidence is the covered fraction, so a
/// returned answer always has confidence 1.0 and anything less is "no
/// answer".
#[derive(Debug, Clone, Copy)]
pub struct MockQa {
    mode: QaMode,
}

impl MockQa {
    pub fn new(mode: QaMode) -> Self {
        MockQa { mode }
    }
}

/// Splits passages into sentences at `.`, `!` or `?` followed by whitespace,
/// and at line breaks.
pub fn sentences(passages: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for passage in passages {
        for line in passage.lines() {
            let mut start = 0;
            let chars: Vec<(usize, char)> = line.char_indices().collect();
            for (k, &(idx, c)) in chars.iter().enumerate() {
                let at_boundary = matches!(c, '.' | '!' | '?')
                    && chars.get(k + 1).is_none_or(|&(_, next)| next.is_whitespace());
                if at_boundary {
                    let end = idx + c.len_utf8();
                    let s = line[start..end].trim();
                    if !s.is_empty() {
                        out.push(s.to_owned());
                    }
                    start = end;
                }
            }
            let tail = line[start..].trim();
            if !tail.is_empty() {
                out.push(tail.to_owned());
            }
        }
    }
    out
}

fn extract(sentence: &str, question: &str) -> String {
    let raw: Vec<&str> = sentence.split_whitespace().filter(|t| !split_punct(t).1.is_empty()).collect();
    let norm: Vec<String> = raw.iter().map(|t| split_punct(t).1.to_lowercase()).collect();
    let q: Vec<String> = tokenize(question, Normalization::WORDS).tokens().to_vec();
    let prefix = norm.iter().zip(&q).take_while(|(a, b)| a == b).count();
    let max_suffix = norm.len() - prefix;
    let suffix = norm.iter().rev().zip(q.iter().rev()).take(max_suffix).take_while(|(a, b)| a == b).count();
    raw[prefix..raw.len() - suffix].join(" ").trim_matches(is_punctuation).to_owned()
}

impl QuestionAnswerer for MockQa {
    fn answer(&self, question: &str, passages: &[String]) -> Result<AnswerResult, BackendError> {
        let wanted = content_words(question);
        if passages.is_empty() || wanted.is_empty() {
            return Ok(AnswerResult::no_answer(question));
        }
        for sentence in sentences(passages) {
            let have = content_words(&sentence);
            let covered = wanted.iter().filter(|w| have.contains(*w)).count() as f64 / wanted.len() as f64;
            if covered < 1.0 {
                continue;
            }
            let text = match self.mode {
                QaMode::Sentence => sentence,
                QaMode::Extractive => extract(&sentence, question),
            };
            if text.is_empty() {
                return Ok(AnswerResult::no_answer(question));
            }
            return Ok(AnswerResult { question: question.to_owned(), answer_text: text, confidence: covered });
        }
        Ok(AnswerResult::no_answer(question))
    }
}

/// Question generation by substituting the question word for the first
/// occurrence of the answer span in the claim, the same surface form the
/// template engine produces.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockQg;

impl QuestionGenerator for MockQg {
    fn question(&self, claim: &str, w: FiveW, answer_span: &str) -> Result<String, BackendError> {
        let Some(at) = claim.find(answer_span).filter(|_| !answer_span.is_empty()) else {
            return Err(BackendError::NotRecorded(format!("answer span {answer_span:?} not in claim")));
        };
        let word = if at == 0 { capitalize(w.word()) } else { w.word().to_owned() };
        let substituted = format!("{}{}{}", &claim[..at], word, &claim[at + answer_span.len()..]);
        Ok(finish_question(&substituted))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmetrics::med;

    #[test]
    fn paraphrase_mock_is_deterministic() {
        let m = MockParaphraser::new(Lexicon::builtin());
        assert!(m.paraphrase("anything", 0).unwrap().is_empty());
        let claim = "Moderna’s lawsuits against Pfizer-BioNTech show COVID-19 vaccines were in the works before the pandemic started.";
        let a = m.paraphrase(claim, 5).unwrap();
        assert_eq!(a, m.paraphrase(claim, 5).unwrap());
        assert_eq!(a.len(), 5);
        assert_eq!(
            a[0],
            "Moderna’s lawsuits against Pfizer-BioNTech demonstrate COVID-19 vaccines were in the making before the pandemic began."
        );
    }

    #[test]
    fn paraphrase_mock_sentinel_fallback() {
        let m = MockParaphraser::new(Lexicon::new());
        let out = m.paraphrase("Ann met Bob.", 2).unwrap();
        assert_eq!(out, ["Ann met Bob. alt1a alt1b alt1c", "Ann met Bob. alt2a alt2b alt2c"]);
        let claim = tokenize("Ann met Bob.", Normalization::WORDS);
        for p in &out {
            assert_eq!(med(&claim, &tokenize(p, Normalization::WORDS)), 3);
        }
    }

    #[test]
    fn paraphrase_preserves_case_and_punctuation() {
        let mut lex = Lexicon::new();
        lex.add_synonyms("big", ["large"]);
        let m = MockParaphraser::new(lex);
        let out = m.paraphrase("Big dogs are big.", 2).unwrap();
        assert_eq!(out[0], "Big dogs are large.");
        assert_eq!(out[1], "Large dogs are big.");
    }

    #[test]
    fn nli_rules() {
        let nli = MockNli::new(Lexicon::builtin());
        assert_eq!(nli.decide("The sky is blue.", "The sky is blue."), NliLabel::Entailment);
        assert_eq!(nli.decide("The sky is blue.", "Cats purr loudly."), NliLabel::Neutral);
        assert_eq!(nli.decide("The claim is true.", "The claim is false."), NliLabel::Contradiction);
        assert_eq!(nli.decide("Prices will increase.", "Prices will rise."), NliLabel::Entailment);
        let out = nli.classify("a b", "a b").unwrap();
        assert_eq!(out.scores.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn lexicon_file_form() {
        let lex = Lexicon::parse("# demo\nsyn\tquick\tfast|rapid\nant\thot\tcold\n").unwrap();
        assert_eq!(lex.alternatives("quick").unwrap(), ["fast", "rapid"]);
        assert!(lex.are_antonyms("cold", "hot"));
        assert!(Lexicon::parse("syn\tonly-two").is_err());
    }

    #[test]
    fn sentence_splitting() {
        let s = sentences(&["One here. Two there! 3.5 stays whole?\nFour".to_owned()]);
        assert_eq!(s, ["One here.", "Two there!", "3.5 stays whole?", "Four"]);
    }

    #[test]
    fn qa_rules() {
        let qa = MockQa::new(QaMode::Sentence);
        assert_eq!(qa.answer("Who won?", &[]).unwrap(), AnswerResult::no_answer("Who won?"));
        let passages = vec!["Rain fell all day. Manning joined the army in 2007.".to_owned()];
        let got = qa.answer("Who joined the army in 2007?", &passages).unwrap();
        assert_eq!(got.answer_text, "Manning joined the army in 2007.");
        assert_eq!(got.confidence, 1.0);
        // "navy" is missing from every sentence: below full coverage means no answer
        let miss = qa.answer("Who joined the navy in 2007?", &passages).unwrap();
        assert!(miss.answer_text.is_empty());

        let ex = MockQa::new(QaMode::Extractive);
        assert_eq!(ex.answer("Who joined the army in 2007?", &passages).unwrap().answer_text, "Manning");
        assert_eq!(ex.answer("Manning joined what in 2007?", &passages).unwrap().answer_text, "the army");
        assert_eq!(ex.answer("Manning joined the army when?", &passages).unwrap().answer_text, "in 2007");
    }

    #[test]
    fn qg_echo_matches_template_surface() {
        let q = MockQg.question("Manning joined the army in 2007.", FiveW::Who, "Manning").unwrap();
        assert_eq!(q, "Who joined the army in 2007?");
        let q = MockQg.question("Manning joined the army in 2007.", FiveW::When, "in 2007").unwrap();
        assert_eq!(q, "Manning joined the army when?");
        assert!(MockQg.question("abc", FiveW::Who, "zzz").is_err());
    }
}
