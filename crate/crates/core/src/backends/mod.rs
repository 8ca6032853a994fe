//! Model backends for the five roles of the pipeline.
//!
//! Every role is a small object-safe trait. Each has rule-based mocks (see
//! [`mock`]), fixture replays (see [`replay`]) and an HTTP client speaking
//! the sidecar wire protocol (see [`remote`]). [`BackendDescriptor`] is the
//! configuration form used to pick one.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::srl5w::{FiveW, SrlFrame};
use crate::verdict::AnswerResult;

pub mod mock;
pub mod remote;
pub mod replay;

pub use mock::{Lexicon, MockNli, MockParaphraser, MockQa, MockQg, QaMode};
pub use remote::{RemoteClient, RetryPolicy};
pub use replay::{ReplayParaphraser, ReplayQg, ReplaySrl, ScriptedQa};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend answered HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("response violates the {role} schema: {detail}")]
    Schema { role: BackendRole, detail: String },
    #[error("{request} request sent to a {descriptor} backend")]
    RoleMismatch { descriptor: BackendRole, request: BackendRole },
    #[error("invalid backend descriptor: {0}")]
    Descriptor(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("no recorded response for {0}")]
    NotRecorded(String),
}

impl BackendError {
    /// Whether repeating the same call may succeed.
    pub fn is_retriable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status >= 500 || *status == 429,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendRole {
    Paraphrase,
    Nli,
    Srl,
    Qg,
    Qa,
}

impl BackendRole {
    pub const ALL: [BackendRole; 5] =
        [BackendRole::Paraphrase, BackendRole::Nli, BackendRole::Srl, BackendRole::Qg, BackendRole::Qa];

    pub fn path(self) -> &'static str {
        match self {
            BackendRole::Paraphrase => "/v1/paraphrase",
            BackendRole::Nli => "/v1/nli",
            BackendRole::Srl => "/v1/srl",
            BackendRole::Qg => "/v1/qg",
            BackendRole::Qa => "/v1/qa",
        }
    }
}

impl fmt::Display for BackendRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendRole::Paraphrase => "paraphrase",
            BackendRole::Nli => "nli",
            BackendRole::Srl => "srl",
            BackendRole::Qg => "qg",
            BackendRole::Qa => "qa",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Remote,
}

/// Configuration naming one backend.
///
/// For mocks, `behavior` picks the rule (`lexicon`, `replay`, `sentence`,
/// `extractive`, `echo`) and `fixture` points at the lexicon or recorded
/// responses it needs. Remote backends need `endpoint` and forbid both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub role: BackendRole,
    pub kind: BackendKind,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<PathBuf>,
}

impl BackendDescriptor {
    pub fn mock(role: BackendRole, model_id: impl Into<String>) -> Self {
        BackendDescriptor { role, kind: BackendKind::Mock, model_id: model_id.into(), endpoint: None, behavior: None, fixture: None }
    }

    pub fn remote(role: BackendRole, model_id: impl Into<String>, endpoint: impl Into<String>) -> Self {
        BackendDescriptor {
            role,
            kind: BackendKind::Remote,
            model_id: model_id.into(),
            endpoint: Some(endpoint.into()),
            behavior: None,
            fixture: None,
        }
    }

    pub fn with_behavior(mut self, behavior: impl Into<String>) -> Self {
        self.behavior = Some(behavior.into());
        self
    }

    pub fn with_fixture(mut self, fixture: impl Into<PathBuf>) -> Self {
        self.fixture = Some(fixture.into());
        self
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        match self.kind {
            BackendKind::Remote if self.endpoint.is_none() => {
                Err(BackendError::Descriptor(format!("remote {} backend {:?} has no endpoint", self.role, self.model_id)))
            }
            BackendKind::Remote if self.behavior.is_some() || self.fixture.is_some() => Err(BackendError::Descriptor(
                format!("remote {} backend {:?} cannot take mock behavior or fixture", self.role, self.model_id),
            )),
            BackendKind::Mock if self.endpoint.is_some() => {
                Err(BackendError::Descriptor(format!("mock {} backend {:?} cannot have an endpoint", self.role, self.model_id)))
            }
            _ => Ok(()),
        }
    }

    /// Parses the compact command-line form:
    /// `mock[:behavior][=fixture]` or `remote:model_id@url`.
    pub fn parse_compact(role: BackendRole, text: &str) -> Result<Self, BackendError> {
        if let Some(rest) = text.strip_prefix("remote:") {
            let (model, url) = rest
                .split_once('@')
                .ok_or_else(|| BackendError::Descriptor(format!("expected remote:model@url, got {text:?}")))?;
            return Ok(BackendDescriptor::remote(role, model, url));
        }
        let rest = text
            .strip_prefix("mock")
            .ok_or_else(|| BackendError::Descriptor(format!("expected mock[:behavior][=fixture] or remote:model@url, got {text:?}")))?;
        let (head, fixture) = match rest.split_once('=') {
            Some((h, f)) => (h, Some(PathBuf::from(f))),
            None => (rest, None),
        };
        let behavior = match head {
            "" => None,
            b => Some(
                b.strip_prefix(':')
                    .ok_or_else(|| BackendError::Descriptor(format!("malformed mock descriptor {text:?}")))?
                    .to_owned(),
            ),
        };
        Ok(BackendDescriptor {
            role,
            kind: BackendKind::Mock,
            model_id: text.to_owned(),
            endpoint: None,
            behavior,
            fixture,
        })
    }

    fn behavior_or<'a>(&'a self, default: &'a str) -> &'a str {
        self.behavior.as_deref().unwrap_or(default)
    }

    fn require_fixture(&self) -> Result<&PathBuf, BackendError> {
        self.fixture
            .as_ref()
            .ok_or_else(|| BackendError::Descriptor(format!("mock {} backend {:?} needs a fixture", self.role, self.model_id)))
    }

    fn check_role(&self, role: BackendRole) -> Result<(), BackendError> {
        if self.role != role {
            return Err(BackendError::RoleMismatch { descriptor: self.role, request: role });
        }
        self.validate()
    }

    fn lexicon(&self) -> Result<Lexicon, BackendError> {
        match &self.fixture {
            Some(path) => Lexicon::from_file(path),
            None => Ok(Lexicon::builtin()),
        }
    }

    fn unknown_behavior(&self) -> BackendError {
        BackendError::Descriptor(format!(
            "unknown mock behavior {:?} for the {} role",
            self.behavior.as_deref().unwrap_or_default(),
            self.role
        ))
    }

    fn remote_client(&self) -> Result<RemoteClient, BackendError> {
        RemoteClient::new(self.clone(), RetryPolicy::default())
    }
}

/// Three-way sentence-pair relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliLabel {
    Entailment,
    Neutral,
    Contradiction,
}

/// An NLI decision with its class scores ordered
/// (entailment, neutral, contradiction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NliOutput {
    pub label: NliLabel,
    pub scores: [f64; 3],
}

pub trait Paraphraser: Send + Sync {
    /// Up to `n` paraphrases of `text`.
    fn paraphrase(&self, text: &str, n: usize) -> Result<Vec<String>, BackendError>;
}

pub trait NliModel: Send + Sync {
    fn classify(&self, premise: &str, hypothesis: &str) -> Result<NliOutput, BackendError>;
}

pub trait RoleLabeler: Send + Sync {
    fn label(&self, claim_id: &str, text: &str) -> Result<Vec<SrlFrame>, BackendError>;
}

pub trait QuestionGenerator: Send + Sync {
    fn question(&self, claim: &str, w: FiveW, answer_span: &str) -> Result<String, BackendError>;
}

pub trait QuestionAnswerer: Send + Sync {
    fn answer(&self, question: &str, passages: &[String]) -> Result<AnswerResult, BackendError>;
}

pub fn build_paraphraser(d: &BackendDescriptor) -> Result<Arc<dyn Paraphraser>, BackendError> {
    d.check_role(BackendRole::Paraphrase)?;
    Ok(match d.kind {
        BackendKind::Remote => Arc::new(d.remote_client()?),
        BackendKind::Mock => match d.behavior_or("lexicon") {
            "lexicon" => Arc::new(MockParaphraser::new(d.lexicon()?)),
            "replay" => Arc::new(ReplayParaphraser::from_file(d.require_fixture()?)?),
            _ => return Err(d.unknown_behavior()),
        },
    })
}

pub fn build_nli(d: &BackendDescriptor) -> Result<Arc<dyn NliModel>, BackendError> {
    d.check_role(BackendRole::Nli)?;
    Ok(match d.kind {
        BackendKind::Remote => Arc::new(d.remote_client()?),
        BackendKind::Mock => match d.behavior_or("lexicon") {
            "lexicon" => Arc::new(MockNli::new(d.lexicon()?)),
            _ => return Err(d.unknown_behavior()),
        },
    })
}

pub fn build_labeler(d: &BackendDescriptor) -> Result<Arc<dyn RoleLabeler>, BackendError> {
    d.check_role(BackendRole::Srl)?;
    Ok(match d.kind {
        BackendKind::Remote => Arc::new(d.remote_client()?),
        BackendKind::Mock => match d.behavior_or("replay") {
            "replay" => Arc::new(ReplaySrl::from_file(d.require_fixture()?)?),
            _ => return Err(d.unknown_behavior()),
        },
    })
}

pub fn build_qg(d: &BackendDescriptor) -> Result<Arc<dyn QuestionGenerator>, BackendError> {
    d.check_role(BackendRole::Qg)?;
    Ok(match d.kind {
        BackendKind::Remote => Arc::new(d.remote_client()?),
        BackendKind::Mock => match d.behavior_or("echo") {
            "echo" => Arc::new(MockQg),
            "replay" => Arc::new(ReplayQg::from_file(d.require_fixture()?)?),
            _ => return Err(d.unknown_behavior()),
        },
    })
}

pub fn build_qa(d: &BackendDescriptor) -> Result<Arc<dyn QuestionAnswerer>, BackendError> {
    d.check_role(BackendRole::Qa)?;
    Ok(match d.kind {
        BackendKind::Remote => Arc::new(d.remote_client()?),
        BackendKind::Mock => match d.behavior_or("sentence") {
            "sentence" => Arc::new(MockQa::new(QaMode::Sentence)),
            "extractive" => Arc::new(MockQa::new(QaMode::Extractive)),
            "replay" => Arc::new(ScriptedQa::from_file(d.require_fixture()?)?),
            _ => return Err(d.unknown_behavior()),
        },
    })
}

/// Default per-request timeout for remote calls.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_invariants() {
        assert!(BackendDescriptor::mock(BackendRole::Qa, "m").validate().is_ok());
        let mut remote = BackendDescriptor::remote(BackendRole::Qa, "t5-3b", "http://localhost:1");
        assert!(remote.validate().is_ok());
        remote.endpoint = None;
        assert!(remote.validate().is_err());
        let mut mock = BackendDescriptor::mock(BackendRole::Qa, "m");
        mock.endpoint = Some("http://x".into());
        assert!(mock.validate().is_err());
    }

    #[test]
    fn compact_descriptors() {
        let d = BackendDescriptor::parse_compact(BackendRole::Qa, "mock:extractive").unwrap();
        assert_eq!((d.kind, d.behavior.as_deref()), (BackendKind::Mock, Some("extractive")));
        let d = BackendDescriptor::parse_compact(BackendRole::Qa, "mock:replay=answers.jsonl").unwrap();
        assert_eq!(d.fixture, Some(PathBuf::from("answers.jsonl")));
        let d = BackendDescriptor::parse_compact(BackendRole::Qa, "mock").unwrap();
        assert_eq!(d.behavior, None);
        let d = BackendDescriptor::parse_compact(BackendRole::Qa, "remote:t5-3b@http://127.0.0.1:8080").unwrap();
        assert_eq!(d.endpoint.as_deref(), Some("http://127.0.0.1:8080"));
        assert_eq!(d.model_id, "t5-3b");
        assert!(BackendDescriptor::parse_compact(BackendRole::Qa, "remote:nourl").is_err());
        assert!(BackendDescriptor::parse_compact(BackendRole::Qa, "mockery").is_err());
        assert!(BackendDescriptor::parse_compact(BackendRole::Qa, "gpt").is_err());
    }

    #[test]
    fn builders_check_role_and_behavior() {
        let qa = BackendDescriptor::mock(BackendRole::Qa, "m");
        assert!(matches!(build_nli(&qa).err(), Some(BackendError::RoleMismatch { .. })));
        assert!(build_qa(&qa).is_ok());
        let odd = qa.clone().with_behavior("psychic");
        assert!(matches!(build_qa(&odd).err(), Some(BackendError::Descriptor(_))));
        let replay = BackendDescriptor::mock(BackendRole::Qa, "m").with_behavior("replay");
        assert!(matches!(build_qa(&replay).err(), Some(BackendError::Descriptor(_))));
    }
}
