#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use fakescope::model::{train_ngram, NGramModel, TrainConfig};
use fakescope_service::{router, AppState, ModelRegistry};

pub const TRAIN_TEXT: &[&str] = &[
    "the cat sat on the mat .",
    "the dog sat on the log .",
    "a cat saw the dog .",
    "the cat ran to the dog .",
    "on the mat the dog sat .",
];

pub fn tiny_model() -> NGramModel {
    let corpus: Vec<Vec<&str>> = TRAIN_TEXT.iter().map(|s| s.split(' ').collect()).collect();
    train_ngram(
        &corpus,
        TrainConfig {
            min_count: 1,
            ..TrainConfig::default()
        },
    )
    .unwrap()
}

pub fn registry_with_tiny() -> ModelRegistry {
    let mut r = ModelRegistry::new();
    r.register("tiny", Arc::new(tiny_model()));
    r
}

/// Serves the API on an ephemeral port in a background runtime.
pub fn start_server(state: AppState) -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, router(state)).await.unwrap();
        });
    });
    format!("http://{addr}")
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into()
}

/// POSTs raw JSON; returns status and parsed body.
pub fn post(base: &str, path: &str, body: &str) -> (u16, serde_json::Value) {
    let mut resp = agent()
        .post(format!("{base}{path}"))
        .content_type("application/json")
        .send(body)
        .unwrap();
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(serde_json::Value::String(text)))
}

pub fn get(base: &str, path: &str) -> (u16, serde_json::Value) {
    let mut resp = agent().get(format!("{base}{path}")).call().unwrap();
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_json().unwrap())
}

/// Minimal external adapter: `/v1/info` plus a uniform `/v1/score` that
/// waits `delay` (or answers HTTP 500 when `fail` is set).
pub fn mock_adapter(vocab: &[&str], delay: Duration, fail: bool) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let vocab: Vec<String> = vocab.iter().map(|s| s.to_string()).collect();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let vocab = vocab.clone();
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut first = String::new();
                reader.read_line(&mut first).unwrap();
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
                let (status, payload) = if first.starts_with("GET /v1/info") {
                    (200, serde_json::json!({"name": "mock", "vocab": vocab, "case_folded": true}).to_string())
                } else if fail {
                    (500, "{}".to_string())
                } else {
                    thread::sleep(delay);
                    let p = 1.0 / vocab.len() as f64;
                    let probs: serde_json::Map<String, serde_json::Value> =
                        vocab.iter().map(|t| (t.clone(), p.into())).collect();
                    (200, serde_json::json!({"probs": probs, "top5": []}).to_string())
                };
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
