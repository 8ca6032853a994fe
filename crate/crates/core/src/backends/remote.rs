//! HTTP client for the model sidecar.
//!
//! Wire protocol: JSON over HTTP POST, one endpoint per role under `/v1/`.
//! Responses are parsed into typed payloads and checked against the role's
//! constraints before they are returned; any mismatch is a schema error.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    BackendDescriptor, BackendError, BackendKind, BackendRole, NliLabel, NliModel, NliOutput, Paraphraser,
    QuestionAnswerer, QuestionGenerator, RoleLabeler, DEFAULT_TIMEOUT,
};
use crate::srl5w::{FiveW, FrameRecord, SpanRecord, SrlFrame};
use crate::verdict::AnswerResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub timeout: Duration,
    /// Extra attempts after the first failure.
    pub retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { timeout: DEFAULT_TIMEOUT, retries: 2, backoff: Duration::from_millis(250) }
    }
}

/// A request body, tagged by the role it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Request {
    Paraphrase { text: String, n: usize },
    Nli { premise: String, hypothesis: String },
    Srl { text: String },
    Qg { claim: String, w: String, answer_span: String },
    Qa { question: String, context: String },
}

impl Request {
    pub fn role(&self) -> BackendRole {
        match self {
            Request::Paraphrase { .. } => BackendRole::Paraphrase,
            Request::Nli { .. } => BackendRole::Nli,
            Request::Srl { .. } => BackendRole::Srl,
            Request::Qg { .. } => BackendRole::Qg,
            Request::Qa { .. } => BackendRole::Qa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ParaphraseResponse {
    pub paraphrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct NliResponse {
    pub label: NliLabel,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SrlResponse {
    pub frames: Vec<WireFrame>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct WireFrame {
    pub verb_index: usize,
    pub tokens: Vec<String>,
    pub spans: Vec<SpanRecord>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct QgResponse {
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct QaResponse {
    pub answer: String,
    pub score: f64,
}

/// A validated response.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Paraphrase(ParaphraseResponse),
    Nli(NliResponse),
    Srl(SrlResponse),
    Qg(QgResponse),
    Qa(QaResponse),
}

fn schema(role: BackendRole, detail: impl Into<String>) -> BackendError {
    BackendError::Schema { role, detail: detail.into() }
}

fn parse<T: for<'de> Deserialize<'de>>(role: BackendRole, body: &str) -> Result<T, BackendError> {
    serde_json::from_str(body).map_err(|e| schema(role, e.to_string()))
}

/// Parses and checks a response body for `role`.
pub fn validate_response(role: BackendRole, body: &str) -> Result<Response, BackendError> {
    match role {
        BackendRole::Paraphrase => Ok(Response::Paraphrase(parse(role, body)?)),
        BackendRole::Nli => {
            let r: NliResponse = parse(role, body)?;
            if r.scores.len() != 3 {
                return Err(schema(role, format!("expected 3 scores, got {}", r.scores.len())));
            }
            if r.scores.iter().any(|s| !(0.0..=1.0).contains(s)) {
                return Err(schema(role, "scores must lie in [0, 1]"));
            }
            let sum: f64 = r.scores.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(schema(role, format!("scores sum to {sum}, expected 1")));
            }
            Ok(Response::Nli(r))
        }
        BackendRole::Srl => {
            let r: SrlResponse = parse(role, body)?;
            for (i, f) in r.frames.iter().enumerate() {
                FrameRecord { claim_id: String::new(), tokens: f.tokens.clone(), verb_index: f.verb_index, spans: f.spans.clone() }
                    .into_frame()
                    .map_err(|e| schema(role, format!("frame {i}: {e}")))?;
            }
            Ok(Response::Srl(r))
        }
        BackendRole::Qg => {
            let r: QgResponse = parse(role, body)?;
            if r.question.trim().is_empty() {
                return Err(schema(role, "empty question"));
            }
            Ok(Response::Qg(r))
        }
        BackendRole::Qa => {
            let r: QaResponse = parse(role, body)?;
            if !(0.0..=1.0).contains(&r.score) {
                return Err(schema(role, format!("score {} outside [0, 1]", r.score)));
            }
            Ok(Response::Qa(r))
        }
    }
}

/// Blocking client for one remote backend. Cloning shares the connection
/// pool.
#[derive(Debug, Clone)]
pub struct RemoteClient {
    descriptor: BackendDescriptor,
    policy: RetryPolicy,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(descriptor: BackendDescriptor, policy: RetryPolicy) -> Result<Self, BackendError> {
        descriptor.validate()?;
        if descriptor.kind != BackendKind::Remote {
            return Err(BackendError::Descriptor(format!("{} backend {:?} is not remote", descriptor.role, descriptor.model_id)));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(policy.timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(RemoteClient { descriptor, policy, agent })
    }

    pub fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn url(&self, role: BackendRole) -> String {
        let base = self.descriptor.endpoint.as_deref().unwrap_or_default().trim_end_matches('/');
        format!("{base}{}", role.path())
    }

    fn attempt(&self, url: &str, request: &Request) -> Result<String, BackendError> {
        let mut response = self
            .agent
            .post(url)
            .send_json(request)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body });
        }
        Ok(body)
    }

    /// One validated round trip, retried on transport failures and 5xx.
    pub fn call(&self, request: &Request) -> Result<Response, BackendError> {
        let role = request.role();
        if role != self.descriptor.role {
            return Err(BackendError::RoleMismatch { descriptor: self.descriptor.role, request: role });
        }
        let url = self.url(role);
        let mut delay = self.policy.backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(&url, request) {
                Ok(body) => return validate_response(role, &body),
                Err(e) if e.is_retriable() && attempt < self.policy.retries => {
                    log::warn!("{} call to {url} failed ({e}); retrying in {delay:?}", self.descriptor.model_id);
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

impl Paraphraser for RemoteClient {
    fn paraphrase(&self, text: &str, n: usize) -> Result<Vec<String>, BackendError> {
        match self.call(&Request::Paraphrase { text: text.to_owned(), n })? {
            Response::Paraphrase(r) => Ok(r.paraphrases.into_iter().take(n).collect()),
            other => unreachable!("validated paraphrase response, got {other:?}"),
        }
    }
}

impl NliModel for RemoteClient {
    fn classify(&self, premise: &str, hypothesis: &str) -> Result<NliOutput, BackendError> {
        let request = Request::Nli { premise: premise.to_owned(), hypothesis: hypothesis.to_owned() };
        match self.call(&request)? {
            Response::Nli(r) => Ok(NliOutput { label: r.label, scores: [r.scores[0], r.scores[1], r.scores[2]] }),
            other => unreachable!("validated nli response, got {other:?}"),
        }
    }
}

impl RoleLabeler for RemoteClient {
    fn label(&self, claim_id: &str, text: &str) -> Result<Vec<SrlFrame>, BackendError> {
        match self.call(&Request::Srl { text: text.to_owned() })? {
            Response::Srl(r) => r
                .frames
                .into_iter()
                .map(|f| {
                    FrameRecord { claim_id: claim_id.to_owned(), tokens: f.tokens, verb_index: f.verb_index, spans: f.spans }
                        .into_frame()
                        .map_err(|e| schema(BackendRole::Srl, e.to_string()))
                })
                .collect(),
            other => unreachable!("validated srl response, got {other:?}"),
        }
    }
}

impl QuestionGenerator for RemoteClient {
    fn question(&self, claim: &str, w: FiveW, answer_span: &str) -> Result<String, BackendError> {
        let request = Request::Qg { claim: claim.to_owned(), w: w.to_string(), answer_span: answer_span.to_owned() };
        match self.call(&request)? {
            Response::Qg(r) => Ok(r.question),
            other => unreachable!("validated qg response, got {other:?}"),
        }
    }
}

impl QuestionAnswerer for RemoteClient {
    fn answer(&self, question: &str, passages: &[String]) -> Result<AnswerResult, BackendError> {
        if passages.is_empty() {
            return Ok(AnswerResult::no_answer(question));
        }
        let request = Request::Qa { question: question.to_owned(), context: passages.join("\n") };
        match self.call(&request)? {
            Response::Qa(r) => Ok(AnswerResult { question: question.to_owned(), answer_text: r.answer, confidence: r.score }),
            other => unreachable!("validated qa response, got {other:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_bodies() {
        let body = serde_json::to_string(&Request::Qg { claim: "c".into(), w: "who".into(), answer_span: "x".into() }).unwrap();
        assert_eq!(body, r#"{"claim":"c","w":"who","answer_span":"x"}"#);
        let body = serde_json::to_string(&Request::Paraphrase { text: "t".into(), n: 5 }).unwrap();
        assert_eq!(body, r#"{"text":"t","n":5}"#);
    }

    #[test]
    fn nli_schema() {
        assert!(validate_response(BackendRole::Nli, r#"{"label":"entailment","scores":[0.9,0.05,0.05]}"#).is_ok());
        for bad in [
            r#"{"label":"entailment","scores":[0.9,0.05]}"#,
            r#"{"label":"entailment","scores":[0.9,0.2,0.05]}"#,
            r#"{"label":"maybe","scores":[0.9,0.05,0.05]}"#,
            r#"{"scores":[1,0,0]}"#,
            "not json",
        ] {
            assert!(matches!(validate_response(BackendRole::Nli, bad), Err(BackendError::Schema { .. })), "{bad}");
        }
    }

    #[test]
    fn other_schemas() {
        assert!(validate_response(BackendRole::Qa, r#"{"answer":"x","score":1.5}"#).is_err());
        assert!(validate_response(BackendRole::Qa, r#"{"answer":"","score":0.0}"#).is_ok());
        assert!(validate_response(BackendRole::Qg, r#"{"question":"  "}"#).is_err());
        assert!(validate_response(BackendRole::Paraphrase, r#"{"paraphrases":"one"}"#).is_err());
        let srl_ok = r#"{"frames":[{"verb_index":1,"tokens":["Ann","ran"],"spans":[{"role":"ARG0","start":0,"end":1}]}]}"#;
        assert!(validate_response(BackendRole::Srl, srl_ok).is_ok());
        let srl_bad = r#"{"frames":[{"verb_index":1,"tokens":["Ann","ran"],"spans":[{"role":"ARG0","start":0,"end":5}]}]}"#;
        assert!(validate_response(BackendRole::Srl, srl_bad).is_err());
    }

    #[test]
    fn role_mismatch_is_rejected_before_io() {
        // nothing listens on this port; a mismatch must fail without trying
        let client = RemoteClient::new(
            BackendDescriptor::remote(BackendRole::Qa, "t5", "http://127.0.0.1:9"),
            RetryPolicy { timeout: Duration::from_millis(50), retries: 0, backoff: Duration::ZERO },
        )
        .unwrap();
        let err = client.call(&Request::Srl { text: "x".into() }).unwrap_err();
        assert_eq!(err, BackendError::RoleMismatch { descriptor: BackendRole::Qa, request: BackendRole::Srl });
        assert!(RemoteClient::new(BackendDescriptor::mock(BackendRole::Qa, "m"), RetryPolicy::default()).is_err());
    }
}
