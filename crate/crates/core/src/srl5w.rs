//! PropBank semantic-role frames and their mapping onto the 5W aspects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textmetrics::{InvalidToken, TokenSeq};

/// The PropBank argument labels the mapping table covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropBankRole {
    Arg0,
    Arg1,
    Arg2,
    Arg3,
    Arg4,
    ArgmTmp,
    ArgmLoc,
    ArgmCau,
    ArgmAdv,
    ArgmMnr,
    ArgmMod,
    ArgmDir,
    ArgmDis,
    ArgmNeg,
}

impl PropBankRole {
    pub const ALL: [PropBankRole; 14] = [
        PropBankRole::Arg0,
        PropBankRole::Arg1,
        PropBankRole::Arg2,
        PropBankRole::Arg3,
        PropBankRole::Arg4,
        PropBankRole::ArgmTmp,
        PropBankRole::ArgmLoc,
        PropBankRole::ArgmCau,
        PropBankRole::ArgmAdv,
        PropBankRole::ArgmMnr,
        PropBankRole::ArgmMod,
        PropBankRole::ArgmDir,
        PropBankRole::ArgmDis,
        PropBankRole::ArgmNeg,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PropBankRole::Arg0 => "ARG0",
            PropBankRole::Arg1 => "ARG1",
            PropBankRole::Arg2 => "ARG2",
            PropBankRole::Arg3 => "ARG3",
            PropBankRole::Arg4 => "ARG4",
            PropBankRole::ArgmTmp => "ARGM-TMP",
            PropBankRole::ArgmLoc => "ARGM-LOC",
            PropBankRole::ArgmCau => "ARGM-CAU",
            PropBankRole::ArgmAdv => "ARGM-ADV",
            PropBankRole::ArgmMnr => "ARGM-MNR",
            PropBankRole::ArgmMod => "ARGM-MOD",
            PropBankRole::ArgmDir => "ARGM-DIR",
            PropBankRole::ArgmDis => "ARGM-DIS",
            PropBankRole::ArgmNeg => "ARGM-NEG",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PropBankRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown PropBank role {0:?}")]
pub struct UnknownRole(pub String);

impl FromStr for PropBankRole {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropBankRole::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| UnknownRole(s.to_owned()))
    }
}

impl Serialize for PropBankRole {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for PropBankRole {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A journalistic aspect. `How` is representable but left out of question
/// generation unless explicitly enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FiveW {
    Who,
    What,
    When,
    Where,
    Why,
    How,
}

impl FiveW {
    /// The five aspects questions are generated for by default.
    pub const FIVE: [FiveW; 5] = [FiveW::Who, FiveW::What, FiveW::When, FiveW::Where, FiveW::Why];
    pub const ALL: [FiveW; 6] = [FiveW::Who, FiveW::What, FiveW::When, FiveW::Where, FiveW::Why, FiveW::How];

    /// Lowercase question word.
    pub fn word(self) -> &'static str {
        match self {
            FiveW::Who => "who",
            FiveW::What => "what",
            FiveW::When => "when",
            FiveW::Where => "where",
            FiveW::Why => "why",
            FiveW::How => "how",
        }
    }
}

impl fmt::Display for FiveW {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown W aspect {0:?}")]
pub struct UnknownW(pub String);

impl FromStr for FiveW {
    type Err = UnknownW;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FiveW::ALL
            .into_iter()
            .find(|w| w.word().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownW(s.to_owned()))
    }
}

/// One labeled argument of a frame, covering tokens `start..end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleSpan {
    pub role: PropBankRole,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// One verb of a sentence with its labeled argument spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrlFrame {
    pub claim_id: String,
    tokens: TokenSeq,
    verb_index: usize,
    spans: Vec<RoleSpan>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameInvalid {
    #[error(transparent)]
    Token(#[from] InvalidToken),
    #[error("verb index {verb_index} outside sentence of {len} tokens")]
    VerbOutOfRange { verb_index: usize, len: usize },
    #[error("{role} span {start}..{end} is invalid for a sentence of {len} tokens")]
    SpanOutOfRange { role: PropBankRole, start: usize, end: usize, len: usize },
    #[error("{role} span {start}..{end} covers the verb at {verb_index}")]
    SpanCoversVerb { role: PropBankRole, start: usize, end: usize, verb_index: usize },
    #[error("spans {first} and {second} overlap")]
    Overlap { first: String, second: String },
}

impl SrlFrame {
    /// Validates indices and overlap constraints and fills in span texts.
    pub fn new(
        claim_id: impl Into<String>,
        tokens: TokenSeq,
        verb_index: usize,
        spans: impl IntoIterator<Item = (PropBankRole, usize, usize)>,
    ) -> Result<Self, FrameInvalid> {
        let len = tokens.len();
        if verb_index >= len {
            return Err(FrameInvalid::VerbOutOfRange { verb_index, len });
        }
        let mut built: Vec<RoleSpan> = Vec::new();
        for (role, start, end) in spans {
            if start >= end || end > len {
                return Err(FrameInvalid::SpanOutOfRange { role, start, end, len });
            }
            if (start..end).contains(&verb_index) {
                return Err(FrameInvalid::SpanCoversVerb { role, start, end, verb_index });
            }
            if let Some(other) = built.iter().find(|s| start < s.end && s.start < end) {
                return Err(FrameInvalid::Overlap {
                    first: format!("{} {}..{}", other.role, other.start, other.end),
                    second: format!("{role} {start}..{end}"),
                });
            }
            built.push(RoleSpan { role, start, end, text: tokens.join_range(start, end) });
        }
        Ok(SrlFrame { claim_id: claim_id.into(), tokens, verb_index, spans: built })
    }

    pub fn tokens(&self) -> &TokenSeq {
        &self.tokens
    }

    pub fn verb_index(&self) -> usize {
        self.verb_index
    }

    pub fn verb_text(&self) -> &str {
        &self.tokens.tokens()[self.verb_index]
    }

    pub fn spans(&self) -> &[RoleSpan] {
        &self.spans
    }

    /// The frame as a frame-file record.
    pub fn to_record(&self) -> FrameRecord {
        FrameRecord {
            claim_id: self.claim_id.clone(),
            tokens: self.tokens.tokens().to_vec(),
            verb_index: self.verb_index,
            spans: self
                .spans
                .iter()
                .map(|s| SpanRecord { role: s.role.label().to_owned(), start: s.start, end: s.end })
                .collect(),
        }
    }
}

/// Wire/file form of a frame: one line of the frame file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub claim_id: String,
    pub tokens: Vec<String>,
    pub verb_index: usize,
    pub spans: Vec<SpanRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanRecord {
    pub role: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameRecordError {
    #[error(transparent)]
    Role(#[from] UnknownRole),
    #[error(transparent)]
    Invalid(#[from] FrameInvalid),
}

impl FrameRecord {
    pub fn into_frame(self) -> Result<SrlFrame, FrameRecordError> {
        let tokens = TokenSeq::from_tokens(self.tokens).map_err(FrameInvalid::from)?;
        let spans = self
            .spans
            .into_iter()
            .map(|s| Ok((s.role.parse::<PropBankRole>()?, s.start, s.end)))
            .collect::<Result<Vec<_>, UnknownRole>>()?;
        Ok(SrlFrame::new(self.claim_id, tokens, self.verb_index, spans)?)
    }
}

#[derive(Debug, Error)]
#[error("frame file line {line}: {kind}")]
pub struct FrameError {
    pub line: usize,
    pub kind: FrameErrorKind,
}

#[derive(Debug, Error)]
pub enum FrameErrorKind {
    #[error("malformed record: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Record(#[from] FrameRecordError),
}

/// Parses newline-delimited frame records. Blank lines are skipped; line
/// numbers in errors are 1-based.
pub fn parse_frames(document: &str) -> Result<Vec<SrlFrame>, FrameError> {
    let mut frames = Vec::new();
    for (i, line) in document.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |kind| FrameError { line: i + 1, kind };
        let record: FrameRecord = serde_json::from_str(line).map_err(|e| err(e.into()))?;
        frames.push(record.into_frame().map_err(|e| err(e.into()))?);
    }
    Ok(frames)
}

/// Groups frames by claim id, keeping file order within each claim.
pub fn group_by_claim(frames: Vec<SrlFrame>) -> BTreeMap<String, Vec<SrlFrame>> {
    let mut grouped: BTreeMap<String, Vec<SrlFrame>> = BTreeMap::new();
    for frame in frames {
        grouped.entry(frame.claim_id.clone()).or_default().push(frame);
    }
    grouped
}

/// Total map from PropBank role to an optional W aspect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTable {
    entries: [Option<FiveW>; 14],
}

impl Default for MappingTable {
    /// The argmax cells of the role/aspect co-occurrence table.
    fn default() -> Self {
        let mut entries = [None; 14];
        entries[PropBankRole::Arg0.index()] = Some(FiveW::Who);
        entries[PropBankRole::Arg1.index()] = Some(FiveW::What);
        entries[PropBankRole::ArgmTmp.index()] = Some(FiveW::When);
        entries[PropBankRole::ArgmLoc.index()] = Some(FiveW::Where);
        entries[PropBankRole::ArgmCau.index()] = Some(FiveW::Why);
        entries[PropBankRole::ArgmMnr.index()] = Some(FiveW::How);
        MappingTable { entries }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("mapping line {line}: expected `role<TAB>W`")]
    Shape { line: usize },
    #[error("mapping line {line}: {source}")]
    Role { line: usize, source: UnknownRole },
    #[error("mapping line {line}: {source}")]
    W { line: usize, source: UnknownW },
}

impl MappingTable {
    /// A table mapping every role to nothing.
    pub fn empty() -> Self {
        MappingTable { entries: [None; 14] }
    }

    pub fn get(&self, role: PropBankRole) -> Option<FiveW> {
        self.entries[role.index()]
    }

    pub fn set(&mut self, role: PropBankRole, w: Option<FiveW>) {
        self.entries[role.index()] = w;
    }

    pub fn iter(&self) -> impl Iterator<Item = (PropBankRole, Option<FiveW>)> + '_ {
        PropBankRole::ALL.into_iter().map(|r| (r, self.get(r)))
    }

    /// Applies a two-column tab-separated override (`role`, `W` or `-`) on
    /// top of this table. Blank lines and `#` comments are ignored.
    pub fn apply_overrides(&mut self, content: &str) -> Result<(), MappingError> {
        for (i, raw) in content.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let mut cols = raw.split('\t');
            let (Some(role), Some(w), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(MappingError::Shape { line });
            };
            let role: PropBankRole = role.trim().parse().map_err(|source| MappingError::Role { line, source })?;
            let w = match w.trim() {
                "-" => None,
                other => Some(other.parse().map_err(|source| MappingError::W { line, source })?),
            };
            self.set(role, w);
        }
        Ok(())
    }

    /// Renders the table in override-file form.
    pub fn to_tsv(&self) -> String {
        self.iter()
            .map(|(r, w)| format!("{}\t{}\n", r, w.map_or("-".to_owned(), |w| w.to_string())))
            .collect()
    }
}

pub fn map_role(role: PropBankRole, table: &MappingTable) -> Option<FiveW> {
    table.get(role)
}

/// Two spans of one frame mapped to the same aspect; the earlier one won.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub w: FiveW,
    pub kept: RoleSpan,
    pub discarded: RoleSpan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub spans: BTreeMap<FiveW, RoleSpan>,
    pub collisions: Vec<Collision>,
}

/// Maps each span of `frame` to its aspect. When several spans land on the
/// same aspect the earliest-starting one is kept and a collision recorded.
pub fn extract_5w(frame: &SrlFrame, table: &MappingTable) -> Extraction {
    let mut ordered: Vec<&RoleSpan> = frame.spans().iter().collect();
    ordered.sort_by_key(|s| s.start);
    let mut out = Extraction::default();
    for span in ordered {
        let Some(w) = table.get(span.role) else { continue };
        match out.spans.get(&w) {
            Some(kept) => {
                log::warn!(
                    "claim {}: {} span {:?} also maps to {w}; keeping {:?}",
                    frame.claim_id,
                    span.role,
                    span.text,
                    kept.text
                );
                out.collisions.push(Collision { w, kept: kept.clone(), discarded: span.clone() });
            }
            None => {
                out.spans.insert(w, span.clone());
            }
        }
    }
    out
}

/// Per-aspect presence counts over a corpus of claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WPresence {
    pub corpus_size: usize,
    pub counts: BTreeMap<FiveW, usize>,
}

impl WPresence {
    pub fn count(&self, w: FiveW) -> usize {
        self.counts.get(&w).copied().unwrap_or(0)
    }

    pub fn fraction(&self, w: FiveW) -> f64 {
        if self.corpus_size == 0 {
            0.0
        } else {
            self.count(w) as f64 / self.corpus_size as f64
        }
    }
}

/// A claim counts toward an aspect if any of its frames yields that aspect.
pub fn w_presence<'a, I>(frames_per_claim: I, table: &MappingTable) -> WPresence
where
    I: IntoIterator<Item = &'a [SrlFrame]>,
{
    let mut counts: BTreeMap<FiveW, usize> = FiveW::ALL.into_iter().map(|w| (w, 0)).collect();
    let mut corpus_size = 0;
    for frames in frames_per_claim {
        corpus_size += 1;
        let present: BTreeSet<FiveW> = frames
            .iter()
            .flat_map(|f| f.spans().iter().filter_map(|s| table.get(s.role)))
            .collect();
        for w in present {
            *counts.get_mut(&w).expect("all aspects seeded") += 1;
        }
    }
    WPresence { corpus_size, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn frame(tokens: &[&str], verb: usize, spans: &[(PropBankRole, usize, usize)]) -> SrlFrame {
        SrlFrame::new("c", TokenSeq::from_tokens(tokens.iter().copied()).unwrap(), verb, spans.iter().copied())
            .unwrap()
    }

    #[test]
    fn role_labels_round_trip() {
        for r in PropBankRole::ALL {
            assert_eq!(r.label().parse::<PropBankRole>().unwrap(), r);
        }
        assert!("ARGM-PRP".parse::<PropBankRole>().is_err());
        assert!("arg0".parse::<PropBankRole>().is_err());
    }

    #[test]
    fn default_mapping() {
        let t = MappingTable::default();
        assert_eq!(map_role(PropBankRole::Arg0, &t), Some(FiveW::Who));
        assert_eq!(map_role(PropBankRole::ArgmCau, &t), Some(FiveW::Why));
        assert_eq!(map_role(PropBankRole::ArgmDis, &t), None);
        assert_eq!(t.iter().filter(|(_, w)| w.is_some()).count(), 6);
    }

    #[test]
    fn overrides() {
        let mut t = MappingTable::default();
        t.apply_overrides("# enable ARG4\nARG4\tWhere\nARGM-MNR\t-\n").unwrap();
        assert_eq!(t.get(PropBankRole::Arg4), Some(FiveW::Where));
        assert_eq!(t.get(PropBankRole::ArgmMnr), None);
        assert_eq!(t.apply_overrides("ARG9\tWho"), Err(MappingError::Role { line: 1, source: UnknownRole("ARG9".into()) }));
        assert!(matches!(t.apply_overrides("\nARG0 Who"), Err(MappingError::Shape { line: 2 })));
        assert!(matches!(t.apply_overrides("ARG0\tWhom"), Err(MappingError::W { .. })));

        let mut again = MappingTable::empty();
        again.apply_overrides(&t.to_tsv()).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn parse_frames_examples() {
        assert!(parse_frames("").unwrap().is_empty());
        let frames = parse_frames(&fixtures::moderna_frame_file()).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].verb_text(), "were");
        assert_eq!(frames[1].verb_text(), "started");

        let bad = r#"{"claim_id":"x","tokens":["a","b"],"verb_index":0,"spans":[{"role":"ARG1","start":1,"end":3}]}"#;
        let err = parse_frames(&format!("\n{bad}")).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, FrameErrorKind::Record(FrameRecordError::Invalid(FrameInvalid::SpanOutOfRange { .. }))));
    }

    #[test]
    fn parse_frames_rejections() {
        let unknown = r#"{"claim_id":"x","tokens":["a","b"],"verb_index":0,"spans":[{"role":"ARGM-XYZ","start":1,"end":2}]}"#;
        assert!(matches!(parse_frames(unknown).unwrap_err().kind, FrameErrorKind::Record(FrameRecordError::Role(_))));
        let overlap = r#"{"claim_id":"x","tokens":["a","b","c","d"],"verb_index":0,"spans":[{"role":"ARG0","start":1,"end":3},{"role":"ARG1","start":2,"end":4}]}"#;
        assert!(matches!(
            parse_frames(overlap).unwrap_err().kind,
            FrameErrorKind::Record(FrameRecordError::Invalid(FrameInvalid::Overlap { .. }))
        ));
        let covers = r#"{"claim_id":"x","tokens":["a","b","c"],"verb_index":1,"spans":[{"role":"ARG0","start":0,"end":2}]}"#;
        assert!(matches!(
            parse_frames(covers).unwrap_err().kind,
            FrameErrorKind::Record(FrameRecordError::Invalid(FrameInvalid::SpanCoversVerb { .. }))
        ));
        assert!(matches!(parse_frames("{not json").unwrap_err().kind, FrameErrorKind::Syntax(_)));
        let blank_token = r#"{"claim_id":"x","tokens":["a",""],"verb_index":0,"spans":[]}"#;
        assert!(parse_frames(blank_token).is_err());
    }

    #[test]
    fn extract_examples() {
        use PropBankRole::*;
        let f = frame(&["Ann", "met", "Bob", "on", "Monday", "."], 1, &[(Arg0, 0, 1), (Arg1, 2, 3), (ArgmTmp, 3, 5)]);
        let ex = extract_5w(&f, &MappingTable::default());
        assert_eq!(ex.spans.keys().copied().collect::<Vec<_>>(), [FiveW::Who, FiveW::What, FiveW::When]);
        assert_eq!(ex.spans[&FiveW::When].text, "on Monday");

        let only_mod = frame(&["Ann", "will", "go"], 2, &[(ArgmMod, 1, 2)]);
        assert!(extract_5w(&only_mod, &MappingTable::default()).spans.is_empty());

        // listed out of order: the earlier-starting span still wins
        let twice = frame(&["x", "saw", "a", "and", "b"], 1, &[(Arg1, 4, 5), (Arg1, 2, 3)]);
        let ex = extract_5w(&twice, &MappingTable::default());
        assert_eq!(ex.spans[&FiveW::What].text, "a");
        assert_eq!(ex.collisions.len(), 1);
        assert_eq!(ex.collisions[0].discarded.text, "b");
    }

    #[test]
    fn presence_examples() {
        use PropBankRole::*;
        let table = MappingTable::default();
        let empty: Vec<Vec<SrlFrame>> = vec![];
        let p = w_presence(empty.iter().map(Vec::as_slice), &table);
        assert!(FiveW::ALL.iter().all(|&w| p.fraction(w) == 0.0));

        let one = [vec![frame(&["Ann", "ate", "soup"], 1, &[(Arg0, 0, 1), (Arg1, 2, 3)])]];
        let p = w_presence(one.iter().map(Vec::as_slice), &table);
        assert_eq!(p.fraction(FiveW::Who), 1.0);
        assert_eq!(p.fraction(FiveW::What), 1.0);
        assert_eq!(p.fraction(FiveW::When), 0.0);
    }

    #[test]
    fn presence_ten_claim_fixture() {
        use PropBankRole::*;
        let toks = ["w0", "w1", "w2", "w3", "w4", "w5"];
        // (claim frames) -> hand count: Who in 0,1,2,5,8 ; What in 0,3,4,5,6,9 ; When in 1,6 ;
        // Where in 7 ; Why in 2,3 ; How in none (ARGM-MNR absent)
        let layout: Vec<Vec<Vec<(PropBankRole, usize, usize)>>> = vec![
            vec![vec![(Arg0, 0, 1), (Arg1, 2, 3)]],
            vec![vec![(Arg0, 0, 1)], vec![(ArgmTmp, 2, 4)]],
            vec![vec![(Arg0, 0, 1), (ArgmCau, 2, 6)]],
            vec![vec![(Arg1, 0, 1)], vec![(ArgmCau, 2, 3)]],
            vec![vec![(Arg1, 0, 1), (Arg2, 2, 3)]],
            vec![vec![(Arg0, 0, 1), (Arg1, 2, 3)], vec![(Arg0, 0, 1)]],
            vec![vec![(ArgmTmp, 0, 1), (Arg1, 2, 3)]],
            vec![vec![(ArgmLoc, 0, 1), (ArgmNeg, 2, 3)]],
            vec![vec![(Arg0, 0, 1), (ArgmMod, 2, 3)]],
            vec![vec![(Arg1, 0, 1)], vec![], vec![(Arg3, 2, 3)]],
        ];
        let corpus: Vec<Vec<SrlFrame>> =
            layout.iter().map(|claim| claim.iter().map(|spans| frame(&toks, 1, spans)).collect()).collect();
        let p = w_presence(corpus.iter().map(Vec::as_slice), &MappingTable::default());
        assert_eq!(p.corpus_size, 10);
        assert_eq!(p.count(FiveW::Who), 5);
        assert_eq!(p.count(FiveW::What), 6);
        assert_eq!(p.count(FiveW::When), 2);
        assert_eq!(p.count(FiveW::Where), 1);
        assert_eq!(p.count(FiveW::Why), 2);
        assert_eq!(p.count(FiveW::How), 0);
        assert_eq!(p.fraction(FiveW::What), 0.6);
    }
}
