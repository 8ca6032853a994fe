//! Unified claim corpus: ingestion, deduplication, splitting, statistics
//! and newline-delimited JSON storage.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::paraphrase::{CandidateStatus, ParaphraseCandidate};
use crate::qagen::FiveWQaPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntailmentClass {
    Support,
    Neutral,
    Refute,
}

impl EntailmentClass {
    pub const ALL: [EntailmentClass; 3] = [EntailmentClass::Support, EntailmentClass::Neutral, EntailmentClass::Refute];

    pub fn name(self) -> &'static str {
        match self {
            EntailmentClass::Support => "support",
            EntailmentClass::Neutral => "neutral",
            EntailmentClass::Refute => "refute",
        }
    }

    /// Maps the label spellings used by the source datasets onto the three
    /// classes.
    pub fn normalize(label: &str) -> Option<EntailmentClass> {
        let key: String =
            label.trim().to_lowercase().chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
        match key.split_whitespace().collect::<Vec<_>>().join(" ").as_str() {
            "support" | "supports" | "supported" | "true" | "entailment" | "entailed" => Some(EntailmentClass::Support),
            "neutral" | "nei" | "not enough info" | "not enough information" | "insufficient" => {
                Some(EntailmentClass::Neutral)
            }
            "refute" | "refutes" | "refuted" | "false" | "fake" | "contradiction" => Some(EntailmentClass::Refute),
            _ => None,
        }
    }
}

impl fmt::Display for EntailmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dataset a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Fever,
    Hover,
    Vitc,
    Faviq,
    Factify1,
    Factify2,
    Other,
}

impl SourceTag {
    pub const ALL: [SourceTag; 7] = [
        SourceTag::Fever,
        SourceTag::Hover,
        SourceTag::Vitc,
        SourceTag::Faviq,
        SourceTag::Factify1,
        SourceTag::Factify2,
        SourceTag::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceTag::Fever => "fever",
            SourceTag::Hover => "hover",
            SourceTag::Vitc => "vitc",
            SourceTag::Faviq => "faviq",
            SourceTag::Factify1 => "factify1",
            SourceTag::Factify2 => "factify2",
            SourceTag::Other => "other",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown adapter {0:?} (expected fever, hover, vitc, faviq, factify1, factify2, other or generic)")]
pub struct UnknownAdapter(pub String);

/// Adapter tag as given on the command line. `generic` reads the source
/// tag from each record, defaulting to `other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adapter {
    Source(SourceTag),
    Generic,
}

impl FromStr for Adapter {
    type Err = UnknownAdapter;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "generic" {
            return Ok(Adapter::Generic);
        }
        SourceTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .map(Adapter::Source)
            .ok_or_else(|| UnknownAdapter(s.to_owned()))
    }
}

/// Hex SHA-256 of a passage, the default document key.
pub fn doc_key_for(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidencePassage {
    pub doc_key: String,
    pub text: String,
}

impl EvidencePassage {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        EvidencePassage { doc_key: doc_key_for(&text), text }
    }

    pub fn with_key(doc_key: impl Into<String>, text: impl Into<String>) -> Self {
        EvidencePassage { doc_key: doc_key.into(), text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub source: SourceTag,
    pub claim: String,
    pub label: EntailmentClass,
    #[serde(default)]
    pub evidence: Vec<EvidencePassage>,
    #[serde(default)]
    pub paraphrases: Vec<ParaphraseCandidate>,
    #[serde(default)]
    pub qa_pairs: Vec<FiveWQaPair>,
}

impl ClaimRecord {
    pub fn new(id: impl Into<String>, source: SourceTag, claim: impl Into<String>, label: EntailmentClass) -> Self {
        ClaimRecord {
            id: id.into(),
            source,
            claim: claim.into(),
            label,
            evidence: Vec::new(),
            paraphrases: Vec::new(),
            qa_pairs: Vec::new(),
        }
    }

    pub fn evidence_texts(&self) -> Vec<String> {
        self.evidence.iter().map(|e| e.text.clone()).collect()
    }

    /// Support and neutral claims are expected to carry evidence.
    pub fn lacks_expected_evidence(&self) -> bool {
        self.label != EntailmentClass::Refute && self.evidence.iter().all(|e| e.text.trim().is_empty())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{path}: not a newline-delimited JSON object file (line {line})")]
    Format { path: String, line: usize },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
}

/// A source line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejected {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ingested {
    pub records: Vec<ClaimRecord>,
    pub rejected: Vec<Rejected>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEvidence {
    Text(String),
    Keyed { doc_key: Option<String>, text: String },
}

#[derive(Deserialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<Value>,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    claim: Option<String>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    evidence: Vec<RawEvidence>,
}

fn raw_to_record(raw: RawRecord, adapter: Adapter, line: usize) -> Result<ClaimRecord, String> {
    let claim = raw.claim.map(|c| c.trim().to_owned()).filter(|c| !c.is_empty()).ok_or("missing claim text")?;
    let label_text = raw.label.ok_or("missing label")?;
    let label = EntailmentClass::normalize(&label_text).ok_or_else(|| format!("unknown label {label_text:?}"))?;
    let source = match adapter {
        Adapter::Source(tag) => tag,
        Adapter::Generic => match raw.source.as_deref() {
            None => SourceTag::Other,
            Some(s) => match s.parse::<Adapter>() {
                Ok(Adapter::Source(tag)) => tag,
                _ => return Err(format!("unknown source {s:?}")),
            },
        },
    };
    let local_id = match raw.id {
        None | Some(Value::Null) => line.to_string(),
        Some(Value::String(s)) => s,
        Some(other) => other.to_string(),
    };
    let evidence = raw
        .evidence
        .into_iter()
        .map(|e| match e {
            RawEvidence::Text(t) => EvidencePassage::new(t),
            RawEvidence::Keyed { doc_key: Some(k), text } if !k.is_empty() => EvidencePassage::with_key(k, text),
            RawEvidence::Keyed { text, .. } => EvidencePassage::new(text),
        })
        .filter(|e| !e.text.trim().is_empty())
        .collect();
    Ok(ClaimRecord {
        id: format!("{source}-{local_id}"),
        source,
        claim,
        label,
        evidence,
        paraphrases: Vec::new(),
        qa_pairs: Vec::new(),
    })
}

/// Parses source records in the generic format: one JSON object per line
/// with `claim`, `label`, optional `id`, `source` and `evidence` (strings
/// or `{doc_key, text}` objects). Record ids are prefixed with the source
/// tag. Bad records are collected; a first line that is not a JSON object
/// means the whole file is in the wrong format.
pub fn ingest_str(content: &str, adapter: Adapter, path: &str) -> Result<Ingested, CorpusError> {
    let mut out = Ingested::default();
    let mut first = true;
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(_) if first => return Err(CorpusError::Format { path: path.to_owned(), line: line_no }),
            Err(e) => {
                out.rejected.push(Rejected { line: line_no, reason: format!("malformed JSON: {e}") });
                continue;
            }
        };
        if first && !value.is_object() {
            return Err(CorpusError::Format { path: path.to_owned(), line: line_no });
        }
        first = false;
        let parsed = serde_json::from_value::<RawRecord>(value)
            .map_err(|e| e.to_string())
            .and_then(|raw| raw_to_record(raw, adapter, line_no));
        match parsed {
            Ok(record) => out.records.push(record),
            Err(reason) => out.rejected.push(Rejected { line: line_no, reason }),
        }
    }
    Ok(out)
}

pub fn ingest_source(path: &Path, adapter: Adapter) -> Result<Ingested, CorpusError> {
    let content = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    ingest_str(&content, adapter, &path.display().to_string())
}

/// Casefolded, whitespace-collapsed claim text.
pub fn dedup_key(claim: &str) -> String {
    claim.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// Keeps the first record for each dedup key, in input order.
pub fn dedup(records: Vec<ClaimRecord>) -> (Vec<ClaimRecord>, usize) {
    let before = records.len();
    let mut seen = HashSet::new();
    let kept: Vec<ClaimRecord> = records.into_iter().filter(|r| seen.insert(dedup_key(&r.claim))).collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

pub fn check_unique_ids(records: &[ClaimRecord]) -> Result<(), CorpusError> {
    let mut ids = HashSet::new();
    for r in records {
        if !ids.insert(r.id.as_str()) {
            return Err(CorpusError::DuplicateId(r.id.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("split fractions must be positive, got {0}")]
    NonPositive(f64),
    #[error("split fractions sum to {0}, more than 1")]
    SumAboveOne(f64),
}

/// A label-stratified partition. `rest` holds whatever the fractions leave
/// unassigned and is empty when they sum to 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Split {
    pub train: Vec<ClaimRecord>,
    pub dev: Vec<ClaimRecord>,
    pub test: Vec<ClaimRecord>,
    pub rest: Vec<ClaimRecord>,
}

/// Bucket sizes by largest remainder, so they sum to `round(sum * total)`.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let target = (weights.iter().sum::<f64>() * total as f64 + 1e-9).floor() as usize;
    let ideal: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut sizes: Vec<usize> = ideal.iter().map(|x| (x + 1e-9).floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (ideal[b] - sizes[b] as f64).total_cmp(&(ideal[a] - sizes[a] as f64)).then(a.cmp(&b)));
    let short = target.saturating_sub(sizes.iter().sum());
    for &i in order.iter().take(short) {
        sizes[i] += 1;
    }
    sizes
}

/// Rounds the class x bucket table of ideal counts so that every row sums
/// to its class size, every column to its bucket size, and every entry is
/// the floor or ceiling of its ideal. Solved as a small max-flow.
fn controlled_rounding(rows: &[usize], cols: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = rows.iter().sum();
    let ideal = |r: usize, c: usize| rows[r] as f64 * cols[c] as f64 / total.max(1) as f64;
    let mut table: Vec<Vec<usize>> =
        (0..rows.len()).map(|r| (0..cols.len()).map(|c| (ideal(r, c) + 1e-9).floor() as usize).collect()).collect();
    let mut row_need: Vec<usize> = (0..rows.len()).map(|r| rows[r] - table[r].iter().sum::<usize>()).collect();
    let mut col_need: Vec<usize> =
        (0..cols.len()).map(|c| cols[c] - (0..rows.len()).map(|r| table[r][c]).sum::<usize>()).collect();
    let fractional = |r: usize, c: usize| ideal(r, c) - (ideal(r, c) + 1e-9).floor() > 1e-9;
    // augmenting paths: row -> column along fractional cells, or a column
    // already filled by another row can pass its unit back through that row
    while let Some(start) = (0..rows.len()).find(|&r| row_need[r] > 0) {
        let mut prev_row: Vec<Option<usize>> = vec![None; cols.len()];
        let mut prev_col: Vec<Option<usize>> = vec![None; rows.len()];
        let mut visited_rows = vec![false; rows.len()];
        visited_rows[start] = true;
        let mut frontier = vec![start];
        let mut end = None;
        'search: while let Some(r) = frontier.pop() {
            for c in 0..cols.len() {
                let floor = (ideal(r, c) + 1e-9).floor() as usize;
                if prev_row[c].is_some() || !fractional(r, c) || table[r][c] > floor {
                    continue;
                }
                prev_row[c] = Some(r);
                if col_need[c] > 0 {
                    end = Some(c);
                    break 'search;
                }
                for r2 in 0..rows.len() {
                    let floor2 = (ideal(r2, c) + 1e-9).floor() as usize;
                    if !visited_rows[r2] && table[r2][c] > floor2 {
                        visited_rows[r2] = true;
                        prev_col[r2] = Some(c);
                        frontier.push(r2);
                    }
                }
            }
        }
        let Some(mut c) = end else { break };
        col_need[c] -= 1;
        loop {
            let r = prev_row[c].expect("path");
            table[r][c] += 1;
            match prev_col[r] {
                Some(c_prev) => {
                    table[r][c_prev] -= 1;
                    c = c_prev;
                }
                None => {
                    row_need[r] -= 1;
                    break;
                }
            }
        }
    }
    table
}

/// Deterministic label-stratified split. Bucket sizes follow the fractions
/// by largest remainder; each class is spread over the buckets in
/// proportion, shuffled with a seeded ChaCha generator. Records keep their
/// input order inside each bucket.
pub fn split(records: Vec<ClaimRecord>, fractions: [f64; 3], seed: u64) -> Result<Split, SplitError> {
    if let Some(&f) = fractions.iter().find(|&&f| f <= 0.0 || !f.is_finite()) {
        return Err(SplitError::NonPositive(f));
    }
    let sum: f64 = fractions.iter().sum();
    if sum > 1.0 + 1e-9 {
        return Err(SplitError::SumAboveOne(sum));
    }
    let weights = [fractions[0], fractions[1], fractions[2], (1.0 - sum).max(0.0)];
    let mut cols = apportion(&weights[..3], records.len());
    cols.push(records.len() - cols.iter().sum::<usize>());

    let by_class: Vec<Vec<usize>> = EntailmentClass::ALL
        .iter()
        .map(|&class| (0..records.len()).filter(|&i| records[i].label == class).collect())
        .collect();
    let rows: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let table = controlled_rounding(&rows, &cols);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bucket_of = vec![0usize; records.len()];
    for (class, members) in by_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let mut offset = 0;
        for (bucket, &count) in table[class].iter().enumerate() {
            for &i in &shuffled[offset..offset + count] {
                bucket_of[i] = bucket;
            }
            offset += count;
        }
    }
    let mut out = Split::default();
    for (record, bucket) in records.into_iter().zip(bucket_of) {
        match bucket {
            0 => out.train.push(record),
            1 => out.dev.push(record),
            2 => out.test.push(record),
            _ => out.rest.push(record),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub claims: usize,
    pub paraphrases: usize,
    pub qa_pairs: usize,
    pub evidence_docs: usize,
}

impl ClassCounts {
    fn add(&mut self, other: &ClassCounts) {
        self.claims += other.claims;
        self.paraphrases += other.paraphrases;
        self.qa_pairs += other.qa_pairs;
        self.evidence_docs += other.evidence_docs;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_class: BTreeMap<EntailmentClass, ClassCounts>,
    pub per_source: BTreeMap<SourceTag, usize>,
    pub totals: ClassCounts,
    /// Support or neutral claims without evidence.
    pub missing_evidence: usize,
}

/// Per-class counts of claims, kept paraphrases, QA pairs and distinct
/// evidence documents (by key, within the class); totals are the column
/// sums.
pub fn stats(records: &[ClaimRecord]) -> CorpusStats {
    let mut per_class: BTreeMap<EntailmentClass, ClassCounts> =
        EntailmentClass::ALL.iter().map(|&c| (c, ClassCounts::default())).collect();
    let mut docs: BTreeMap<EntailmentClass, BTreeSet<&str>> = BTreeMap::new();
    let mut per_source = BTreeMap::new();
    let mut missing_evidence = 0;
    for r in records {
        let counts = per_class.get_mut(&r.label).expect("all classes present");
        counts.claims += 1;
        counts.paraphrases += r.paraphrases.iter().filter(|p| p.status == CandidateStatus::Kept).count();
        counts.qa_pairs += r.qa_pairs.len();
        let class_docs = docs.entry(r.label).or_default();
        for e in r.evidence.iter().filter(|e| !e.text.trim().is_empty()) {
            class_docs.insert(&e.doc_key);
        }
        *per_source.entry(r.source).or_insert(0) += 1;
        missing_evidence += usize::from(r.lacks_expected_evidence());
    }
    for (class, keys) in docs {
        per_class.get_mut(&class).expect("all classes present").evidence_docs = keys.len();
    }
    let mut totals = ClassCounts::default();
    for counts in per_class.values() {
        totals.add(counts);
    }
    CorpusStats { per_class, per_source, totals, missing_evidence }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>10} {:>12} {:>10} {:>14}", "class", "claims", "paraphrases", "qa_pairs", "evidence_docs")?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, c: &ClassCounts| {
            writeln!(f, "{:<8} {:>10} {:>12} {:>10} {:>14}", name, c.claims, c.paraphrases, c.qa_pairs, c.evidence_docs)
        };
        for (class, counts) in &self.per_class {
            row(f, class.name(), counts)?;
        }
        row(f, "total", &self.totals)?;
        for (source, n) in &self.per_source {
            writeln!(f, "source {source}: {n}")?;
        }
        if self.missing_evidence > 0 {
            writeln!(f, "support/neutral claims without evidence: {}", self.missing_evidence)?;
        }
        Ok(())
    }
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn parse_corpus(content: &str) -> Result<Vec<ClaimRecord>, CorpusError> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let record: ClaimRecord =
                serde_json::from_str(l).map_err(|e| CorpusError::Line { line: i + 1, message: e.to_string() })?;
            if record.claim.trim().is_empty() {
                return Err(CorpusError::Line { line: i + 1, message: "empty claim".into() });
            }
            Ok(record)
        })
        .collect()
}

pub fn read_corpus(path: &Path) -> Result<Vec<ClaimRecord>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    let mut content = String::new();
    for line in io::BufReader::new(file).lines() {
        let line = line.map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
        content.push_str(&line);
        content.push('\n');
    }
    parse_corpus(&content)
}

pub fn write_corpus(records: &[ClaimRecord], path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(to_jsonl(records).as_bytes()).map_err(io_err)?;
    file.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, claim: &str, label: EntailmentClass) -> ClaimRecord {
        ClaimRecord::new(id, SourceTag::Other, claim, label)
    }

    #[test]
    fn label_spellings() {
        assert_eq!(EntailmentClass::normalize("SUPPORTS"), Some(EntailmentClass::Support));
        assert_eq!(EntailmentClass::normalize("NOT ENOUGH INFO"), Some(EntailmentClass::Neutral));
        assert_eq!(EntailmentClass::normalize("Refuted"), Some(EntailmentClass::Refute));
        assert_eq!(EntailmentClass::normalize("maybe"), None);
    }

    #[test]
    fn ingest_examples() {
        assert!(ingest_str("", Adapter::Generic, "x").unwrap().records.is_empty());
        let three = concat!(
            r#"{"id":"1","claim":"A is B.","label":"SUPPORTS","evidence":["A is B indeed."]}"#,
            "\n",
            r#"{"claim":"C is D.","label":"refutes"}"#,
            "\n",
            r#"{"id":7,"claim":"E is F.","label":"NEI","evidence":[{"doc_key":"wiki/E","text":"E."}],"image":"x.png"}"#,
            "\n",
        );
        let got = ingest_str(three, Adapter::Source(SourceTag::Fever), "x").unwrap();
        assert_eq!(got.records.len(), 3);
        assert_eq!(got.records[1].id, "fever-2");
        assert_eq!(got.records[2].id, "fever-7");
        assert_eq!(got.records[2].evidence[0].doc_key, "wiki/E");
        assert_eq!(got.records[0].evidence[0].doc_key, doc_key_for("A is B indeed."));

        let missing = "{\"id\":\"1\",\"claim\":\"ok\",\"label\":\"support\"}\n{\"id\":\"2\",\"label\":\"support\"}\n";
        let got = ingest_str(missing, Adapter::Generic, "x").unwrap();
        assert_eq!(got.records.len(), 1);
        assert_eq!(got.rejected, [Rejected { line: 2, reason: "missing claim text".into() }]);

        assert!(matches!(ingest_str("id,claim\n1,x\n", Adapter::Generic, "x"), Err(CorpusError::Format { line: 1, .. })));
    }

    #[test]
    fn generic_source_field() {
        let line = r#"{"id":"a","source":"vitc","claim":"x y","label":"support"}"#;
        let got = ingest_str(line, Adapter::Generic, "x").unwrap();
        assert_eq!(got.records[0].source, SourceTag::Vitc);
        assert_eq!("bogus".parse::<Adapter>(), Err(UnknownAdapter("bogus".into())));
    }

    #[test]
    fn dedup_examples() {
        use EntailmentClass::*;
        let mut records: Vec<ClaimRecord> = (0..9).map(|i| rec(&i.to_string(), &format!("claim {i}"), Support)).collect();
        records.push(rec("dup", "  CLAIM   3 ", Refute));
        let (kept, dropped) = dedup(records.clone());
        assert_eq!((kept.len(), dropped), (9, 1));
        assert_eq!(kept[3].id, "3");
        let (same, none) = dedup(kept.clone());
        assert_eq!((same, none), (kept, 0));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let records: Vec<ClaimRecord> = (0..100)
            .map(|i| rec(&i.to_string(), &format!("c{i}"), EntailmentClass::ALL[i % 3]))
            .collect();
        let s = split(records.clone(), [0.8, 0.1, 0.1], 7).unwrap();
        assert_eq!((s.train.len(), s.dev.len(), s.test.len(), s.rest.len()), (80, 10, 10, 0));
        assert_eq!(split(records.clone(), [0.8, 0.1, 0.1], 7).unwrap(), s);
        assert_ne!(split(records.clone(), [0.8, 0.1, 0.1], 8).unwrap().train, s.train);
        assert!(split(records.clone(), [0.8, 0.3, 0.1], 7).is_err());
        assert!(split(records, [0.8, 0.0, 0.1], 7).is_err());
    }

    #[test]
    fn controlled_rounding_respects_margins() {
        let rows = [34, 33, 33];
        let cols = [80, 10, 10, 0];
        let t = controlled_rounding(&rows, &cols);
        for (r, &n) in rows.iter().enumerate() {
            assert_eq!(t[r].iter().sum::<usize>(), n);
            for (c, &m) in cols.iter().enumerate() {
                let ideal = n as f64 * m as f64 / 100.0;
                assert!((t[r][c] as f64 - ideal).abs() < 1.0);
            }
        }
        for (c, &m) in cols.iter().enumerate() {
            assert_eq!(t.iter().map(|row| row[c]).sum::<usize>(), m);
        }
    }

    #[test]
    fn stats_examples() {
        use EntailmentClass::*;
        let empty = stats(&[]);
        assert_eq!(empty.totals, ClassCounts::default());
        let s = stats(&[rec("a", "x", Support), rec("b", "y", Support), rec("c", "z", Refute)]);
        assert_eq!(
            [Support, Neutral, Refute].map(|c| s.per_class[&c].claims),
            [2, 0, 1]
        );
        assert_eq!(s.totals.claims, 3);
        assert_eq!(s.missing_evidence, 2);
    }

    #[test]
    fn round_trip_and_bad_line() {
        let mut r = rec("a", "x y", EntailmentClass::Neutral);
        r.evidence.push(EvidencePassage::new("passage"));
        let text = to_jsonl(&[r.clone()]);
        assert!(text.starts_with(r#"{"id":"a","source":"other","claim":"x y","label":"neutral","evidence":[{"doc_key":"#));
        let back = parse_corpus(&text).unwrap();
        assert_eq!(back, [r]);
        assert_eq!(to_jsonl(&back), text);
        let err = parse_corpus(&format!("{text}{{broken\n")).unwrap_err();
        assert!(matches!(err, CorpusError::Line { line: 2, .. }));
        assert!(parse_corpus("").unwrap().is_empty());
    }
}
