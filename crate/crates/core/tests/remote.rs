use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use fivew_core::backends::{
    BackendDescriptor, BackendError, BackendRole, NliLabel, NliModel, Paraphraser, QuestionAnswerer,
    QuestionGenerator, RemoteClient, RetryPolicy, RoleLabeler,
};
use fivew_core::fixtures;
use fivew_core::srl5w::FiveW;
use fivew_core::verdict::{verify_claim, VerdictConfig};
use serde_json::{json, Value};

type Handler = dyn Fn(&str, &Value) -> (u16, String) + Send + Sync;

struct Server {
    url: String,
    hits: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<(String, Value)>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<(String, Value)> {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line).ok()?;
    let path = request_line.split_whitespace().nth(1)?.to_owned();
    let mut length = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).ok()?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    Some((path, serde_json::from_slice(&body).unwrap_or(Value::Null)))
}

fn serve(handler: Arc<Handler>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let (h, b) = (hits.clone(), bodies.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let (handler, hits, bodies) = (handler.clone(), h.clone(), b.clone());
            thread::spawn(move || {
                let Some((path, body)) = read_request(&mut stream) else { return };
                hits.fetch_add(1, Ordering::SeqCst);
                bodies.lock().unwrap().push((path.clone(), body.clone()));
                let (status, payload) = handler(&path, &body);
                let response = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                let _ = stream.write_all(response.as_bytes());
            });
        }
    });
    Server { url, hits, bodies }
}

fn quick() -> RetryPolicy {
    RetryPolicy { timeout: Duration::from_millis(300), retries: 2, backoff: Duration::from_millis(10) }
}

fn client(role: BackendRole, server: &Server) -> RemoteClient {
    RemoteClient::new(BackendDescriptor::remote(role, "test-model", &server.url), quick()).unwrap()
}

#[test]
fn every_role_round_trips() {
    let server = serve(Arc::new(|path: &str, body: &Value| {
        let reply = match path {
            "/v1/paraphrase" => json!({"paraphrases": ["one", "two", "three"]}),
            "/v1/nli" => json!({"label": "entailment", "scores": [0.7, 0.2, 0.1]}),
            "/v1/srl" => json!({"frames": [{"verb_index": 1, "tokens": ["Ann", "ran", "home"],
                                "spans": [{"role": "ARG0", "start": 0, "end": 1}]}]}),
            "/v1/qg" => json!({"question": format!("{} {}?", body["w"].as_str().unwrap(), body["answer_span"].as_str().unwrap())}),
            "/v1/qa" => json!({"answer": "Ann", "score": 0.9}),
            _ => return (404, "{}".into()),
        };
        (200, reply.to_string())
    }));

    assert_eq!(client(BackendRole::Paraphrase, &server).paraphrase("x", 2).unwrap(), ["one", "two"]);
    let nli = client(BackendRole::Nli, &server).classify("p", "h").unwrap();
    assert_eq!(nli.label, NliLabel::Entailment);
    assert_eq!(nli.scores, [0.7, 0.2, 0.1]);
    let frames = client(BackendRole::Srl, &server).label("c1", "Ann ran home").unwrap();
    assert_eq!(frames[0].claim_id, "c1");
    assert_eq!(frames[0].verb_text(), "ran");
    assert_eq!(client(BackendRole::Qg, &server).question("claim", FiveW::Who, "Ann").unwrap(), "Who Ann?");
    let answer = client(BackendRole::Qa, &server).answer("Who ran?", &["Ann ran.".into(), "Bob sat.".into()]).unwrap();
    assert_eq!((answer.answer_text.as_str(), answer.confidence), ("Ann", 0.9));

    let bodies = server.bodies.lock().unwrap();
    let find = |path: &str| bodies.iter().find(|(p, _)| p == path).unwrap().1.clone();
    assert_eq!(find("/v1/paraphrase"), json!({"text": "x", "n": 2}));
    assert_eq!(find("/v1/nli"), json!({"premise": "p", "hypothesis": "h"}));
    assert_eq!(find("/v1/srl"), json!({"text": "Ann ran home"}));
    assert_eq!(find("/v1/qg"), json!({"claim": "claim", "w": "Who", "answer_span": "Ann"}));
    assert_eq!(find("/v1/qa"), json!({"question": "Who ran?", "context": "Ann ran.\nBob sat."}));
}

#[test]
fn malformed_body_is_a_schema_error_without_retry() {
    let server = serve(Arc::new(|_: &str, _: &Value| (200, r#"{"label": "entailment", "scores": [0.9, 0.9, 0.9]}"#.into())));
    let err = client(BackendRole::Nli, &server).classify("p", "h").unwrap_err();
    assert!(matches!(err, BackendError::Schema { .. }), "{err:?}");
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);

    let server = serve(Arc::new(|_: &str, _: &Value| (200, "not json".into())));
    assert!(matches!(client(BackendRole::Qa, &server).answer("q", &["p".into()]), Err(BackendError::Schema { .. })));
}

#[test]
fn unavailable_is_retried_then_reported() {
    let server = serve(Arc::new(|_: &str, _: &Value| (503, r#"{"error": "warming up"}"#.into())));
    let err = client(BackendRole::Qg, &server).question("c", FiveW::What, "x").unwrap_err();
    assert!(matches!(err, BackendError::Status { status: 503, .. }), "{err:?}");
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn bad_request_is_not_retried() {
    let server = serve(Arc::new(|_: &str, _: &Value| (400, r#"{"error": "n must be positive"}"#.into())));
    let err = client(BackendRole::Paraphrase, &server).paraphrase("x", 1).unwrap_err();
    assert!(matches!(err, BackendError::Status { status: 400, .. }));
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn recovers_after_transient_failure() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let server = serve(Arc::new(move |_: &str, _: &Value| {
        if c.fetch_add(1, Ordering::SeqCst) == 0 {
            (503, "{}".into())
        } else {
            (200, r#"{"question": "Who?"}"#.into())
        }
    }));
    assert_eq!(client(BackendRole::Qg, &server).question("c", FiveW::Who, "x").unwrap(), "Who?");
    assert_eq!(server.hits.load(Ordering::SeqCst), 2);
}

#[test]
fn slow_server_times_out_as_transport_error() {
    let server = serve(Arc::new(|_: &str, _: &Value| {
        thread::sleep(Duration::from_millis(800));
        (200, r#"{"question": "late?"}"#.into())
    }));
    let err = client(BackendRole::Qg, &server).question("c", FiveW::Who, "x").unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "{err:?}");
    assert!(err.is_retriable());
    assert_eq!(server.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn refused_connection_is_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let d = BackendDescriptor::remote(BackendRole::Qa, "gone", format!("http://127.0.0.1:{port}"));
    let err = RemoteClient::new(d, quick()).unwrap().answer("q", &["p".into()]).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)));
}

#[test]
fn remote_answers_match_in_process_verdicts() {
    let scripted = fixtures::moderna_scripted_qa();
    let server = serve(Arc::new(move |_: &str, body: &Value| {
        let question = body["question"].as_str().unwrap_or_default();
        let context: Vec<String> = vec![body["context"].as_str().unwrap_or_default().to_owned()];
        let a = scripted.answer(question, &context).unwrap();
        (200, json!({"answer": a.answer_text, "score": a.confidence}).to_string())
    }));
    let record = fixtures::moderna_record();
    let config = VerdictConfig::default();
    let remote = verify_claim(&record, &record.qa_pairs, &client(BackendRole::Qa, &server), &config);
    let local = verify_claim(&record, &record.qa_pairs, &fixtures::moderna_scripted_qa(), &config);
    assert_eq!(remote, local);
    assert_eq!(remote.pattern(), fixtures::moderna_expected_pattern());
}
