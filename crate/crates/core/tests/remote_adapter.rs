//! External adapter protocol against an in-process mock server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use fakescope::model::{AdapterInfo, DetectionModel, RemoteModel, ScoringMode};
use fakescope::scoring::score_document;
use fakescope::Error;
use serde_json::{json, Value};

type Handler = dyn Fn(&Value) -> (u16, String, Duration) + Send + Sync;

/// Serves `/v1/info` with `info` and `/v1/score` via `score`; returns the
/// base URL. One request per connection.
fn mock_adapter(info: Value, score: Box<Handler>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let score: &'static Handler = Box::leak(score);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let info = info.clone();
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request_line = String::new();
                reader.read_line(&mut request_line).unwrap();
                let mut length = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line.trim().is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            length = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let (status, payload, delay) = if request_line.starts_with("GET /v1/info") {
                    (200, info.to_string(), Duration::ZERO)
                } else {
                    let req: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
                    score(&req)
                };
                thread::sleep(delay);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                    payload.len()
                );
            });
        }
    });
    format!("http://{addr}")
}

fn four_token_info(masked: bool) -> Value {
    json!({"name": "mock", "vocab": ["the", "cat", "sat", "."], "causal": true, "masked": masked, "case_folded": true})
}

fn uniform(_: &Value) -> (u16, String, Duration) {
    let body = json!({
        "probs": {"the": 0.25, "cat": 0.25, "sat": 0.25, ".": 0.25},
        "top5": [["the", 0.25], ["cat", 0.25], ["sat", 0.25], [".", 0.25]]
    });
    (200, body.to_string(), Duration::ZERO)
}

#[test]
fn uniform_adapter_gives_log4_entropy() {
    let url = mock_adapter(four_token_info(false), Box::new(uniform));
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    let info = model.info();
    assert!(info.causal && !info.masked);
    let doc = score_document(&model, "The cat sat.", ScoringMode::Causal).unwrap();
    assert_eq!(doc.len(), 4);
    for s in &doc.scores {
        assert!((s.entropy - 4f64.ln()).abs() < 1e-12);
        assert!((s.prob - 0.25).abs() < 1e-12);
        assert_eq!(s.frac_prob, 1.0);
    }
}

#[test]
fn masked_request_on_causal_adapter_is_a_capability_error() {
    let url = mock_adapter(four_token_info(false), Box::new(uniform));
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    let err = score_document(&model, "the cat", ScoringMode::Masked { window: 3 }).unwrap_err();
    assert!(matches!(err, Error::Capability("masked")), "{err:?}");
}

#[test]
fn masked_context_carries_the_mask_marker() {
    let echo: Box<Handler> = Box::new(|req: &Value| {
        assert_eq!(req["mode"], "masked");
        assert_eq!(req["window"], 1);
        let ctx: Vec<&str> = req["context"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert!(ctx.len() <= 3 && ctx.contains(&"<mask>"), "{ctx:?}");
        uniform(req)
    });
    let url = mock_adapter(four_token_info(true), echo);
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    let doc = score_document(&model, "the cat sat .", ScoringMode::Masked { window: 1 }).unwrap();
    assert_eq!(doc.len(), 4);
}

#[test]
fn mass_off_by_more_than_tolerance_is_renormalized_with_a_warning() {
    let short: Box<Handler> = Box::new(|_: &Value| {
        let body = json!({"probs": {"the": 0.4, "cat": 0.2, "sat": 0.1, ".": 0.1}, "top5": [["the", 0.4]]});
        (200, body.to_string(), Duration::ZERO)
    });
    let url = mock_adapter(four_token_info(false), short);
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    let pred = model
        .remote_distribution(&["the".to_string()], ScoringMode::Causal)
        .unwrap();
    assert_eq!(pred.warnings.len(), 1);
    assert!((pred.dist.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let the = model.vocabulary().id("the").unwrap();
    assert!((pred.dist.prob(the) - 0.5).abs() < 1e-12);
}

#[test]
fn undeclared_token_is_a_vocabulary_mismatch() {
    let rogue: Box<Handler> = Box::new(|_: &Value| {
        (200, json!({"probs": {"dog": 1.0}, "top5": []}).to_string(), Duration::ZERO)
    });
    let url = mock_adapter(four_token_info(false), rogue);
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    let err = model.remote_distribution(&[], ScoringMode::Causal).unwrap_err();
    assert!(matches!(err, Error::VocabularyMismatch(_)), "{err:?}");
}

#[test]
fn slow_adapter_times_out() {
    let slow: Box<Handler> = Box::new(|req: &Value| {
        let (s, b, _) = uniform(req);
        (s, b, Duration::from_millis(1500))
    });
    let url = mock_adapter(four_token_info(false), slow);
    let info: AdapterInfo = serde_json::from_value(four_token_info(false)).unwrap();
    let model = RemoteModel::with_info("mock", &url, info, Duration::from_millis(200)).unwrap();
    let err = model.remote_distribution(&[], ScoringMode::Causal).unwrap_err();
    assert!(matches!(err, Error::Timeout(_)), "{err:?}");
}

#[test]
fn http_error_and_garbage_are_protocol_errors() {
    let failing: Box<Handler> = Box::new(|_: &Value| (500, "{}".into(), Duration::ZERO));
    let url = mock_adapter(four_token_info(false), failing);
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    assert!(matches!(
        model.remote_distribution(&[], ScoringMode::Causal),
        Err(Error::Protocol(_))
    ));

    let garbage: Box<Handler> = Box::new(|_: &Value| (200, "not json".into(), Duration::ZERO));
    let url = mock_adapter(four_token_info(false), garbage);
    let model = RemoteModel::connect("mock", &url, Duration::from_secs(5)).unwrap();
    assert!(matches!(
        model.remote_distribution(&[], ScoringMode::Causal),
        Err(Error::Protocol(_))
    ));
}

#[test]
fn unreachable_adapter_fails_to_connect() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    assert!(RemoteModel::connect("gone", &url, Duration::from_millis(500)).is_err());
}
