mod common;

use std::sync::Arc;
use std::thread;
use std::time::Duration;

use common::*;
use fakescope::model::RemoteModel;
use fakescope_service::{AnalyzeResponse, AppState, ModelRegistry, SCHEMA_VERSION};
use serde_json::json;

fn tiny_server() -> String {
    start_server(AppState::new(registry_with_tiny()))
}

#[test]
fn four_token_text_gives_aligned_arrays() {
    let base = tiny_server();
    let (status, body) = post(&base, "/api/analyze", &json!({"text": "The cat sat.", "model": "tiny"}).to_string());
    assert_eq!(status, 200, "{body}");
    let resp: AnalyzeResponse = serde_json::from_value(body).unwrap();
    assert_eq!(resp.schema_version, SCHEMA_VERSION);
    assert_eq!(resp.len(), 4);
    for n in [resp.prob.len(), resp.rank.len(), resp.frac_prob.len(), resp.entropy.len(), resp.bucket.len(), resp.top5.len()] {
        assert_eq!(n, 4);
    }
    assert_eq!(resp.histograms.bucket_counts.iter().sum::<usize>(), 4);
    assert_eq!(resp.scheme.colors, ["green", "yellow", "red", "purple"]);
    assert_eq!(resp.tokens[3].text, ".");
    assert_eq!((resp.tokens[3].start, resp.tokens[3].end), (11, 12));
}

#[test]
fn unknown_model_is_404_with_model_list() {
    let base = tiny_server();
    let (status, body) = post(&base, "/api/analyze", &json!({"text": "the cat", "model": "gpt-9"}).to_string());
    assert_eq!(status, 404);
    assert_eq!(body["models"], json!(["tiny"]));
}

#[test]
fn custom_scheme_gives_three_buckets() {
    let base = tiny_server();
    let req = json!({"text": "the cat sat on the log", "model": "tiny", "scheme": {"thresholds": [5, 50]}});
    let (status, body) = post(&base, "/api/analyze", &req.to_string());
    assert_eq!(status, 200, "{body}");
    let resp: AnalyzeResponse = serde_json::from_value(body).unwrap();
    assert_eq!(resp.histograms.bucket_counts.len(), 3);
    assert_eq!(resp.scheme.colors, ["green", "yellow", "purple"]);
    assert!(resp.bucket.iter().all(|&b| b < 3));
}

#[test]
fn malformed_or_oversized_requests_are_400() {
    let base = tiny_server();
    for bad in [
        "not json".to_string(),
        json!({"model": "tiny"}).to_string(),
        json!({"text": "x", "model": "tiny", "extra": 1}).to_string(),
        json!({"text": "x", "model": "tiny", "mode": "sideways"}).to_string(),
        json!({"text": "x", "model": "tiny", "mode": {"kind": "masked", "window": 0}}).to_string(),
        json!({"text": "x", "model": "tiny", "scheme": {"thresholds": [50, 5]}}).to_string(),
        json!({"text": "   ", "model": "tiny"}).to_string(),
        json!({"text": "a ".repeat(25_001), "model": "tiny"}).to_string(),
    ] {
        let (status, body) = post(&base, "/api/analyze", &bad);
        assert_eq!(status, 400, "{bad:.80} -> {body}");
        assert!(body["error"].is_string());
    }
    // Exactly at the limit is accepted.
    let (status, _) = post(&base, "/api/analyze", &json!({"text": "a ".repeat(25_000), "model": "tiny"}).to_string());
    assert_eq!(status, 200);
}

#[test]
fn masked_mode_is_accepted_in_both_spellings() {
    let base = tiny_server();
    for mode in [json!("masked"), json!({"kind": "masked", "window": 2})] {
        let req = json!({"text": "the cat sat", "model": "tiny", "mode": mode});
        let (status, body) = post(&base, "/api/analyze", &req.to_string());
        assert_eq!(status, 200, "{body}");
        assert_eq!(body["mode"]["kind"], "masked");
    }
}

#[test]
fn models_endpoint_lists_registrations() {
    let (status, body) = get(&start_server(AppState::new(ModelRegistry::new())), "/api/models");
    assert_eq!(status, 200);
    assert_eq!(body["models"], json!([]));

    let (_, body) = get(&tiny_server(), "/api/models");
    assert_eq!(body["models"].as_array().unwrap().len(), 1);
    assert_eq!(body["models"][0]["kind"], "builtin");
    assert_eq!(body["models"][0]["masked"], true);

    let adapter = mock_adapter(&["the", "cat"], Duration::ZERO, false);
    let mut reg = registry_with_tiny();
    reg.register("mock", Arc::new(RemoteModel::connect("mock", &adapter, Duration::from_secs(5)).unwrap()));
    let (_, body) = get(&start_server(AppState::new(reg)), "/api/models");
    let models = body["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    assert_eq!(models[0]["name"], "mock");
    assert_eq!(models[0]["kind"], "external");
    assert_eq!(models[0]["masked"], false);
}

#[test]
fn adapter_failures_map_to_gateway_statuses() {
    let ok = mock_adapter(&["the", "cat"], Duration::ZERO, false);
    let slow = mock_adapter(&["the", "cat"], Duration::from_millis(1500), false);
    let broken = mock_adapter(&["the", "cat"], Duration::ZERO, true);
    let mut reg = ModelRegistry::new();
    for (name, url) in [("ok", &ok), ("slow", &slow), ("broken", &broken)] {
        let m = RemoteModel::connect(name, url, Duration::from_millis(300)).unwrap();
        reg.register(name, Arc::new(m));
    }
    let base = start_server(AppState::new(reg));
    let req = |model: &str| json!({"text": "the cat", "model": model}).to_string();
    assert_eq!(post(&base, "/api/analyze", &req("ok")).0, 200);
    assert_eq!(post(&base, "/api/analyze", &req("slow")).0, 504);
    assert_eq!(post(&base, "/api/analyze", &req("broken")).0, 502);
    // Capability: the mock only scores causally.
    let masked = json!({"text": "the cat", "model": "ok", "mode": "masked"}).to_string();
    assert_eq!(post(&base, "/api/analyze", &masked).0, 400);
}

#[test]
fn concurrent_identical_requests_return_identical_bodies() {
    let base = tiny_server();
    let req = json!({"text": "the dog saw a cat on the mat.", "model": "tiny"}).to_string();
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let (base, req) = (base.clone(), req.clone());
            thread::spawn(move || {
                let mut resp = agent()
                    .post(format!("{base}/api/analyze"))
                    .content_type("application/json")
                    .send(&req)
                    .unwrap();
                resp.body_mut().read_to_string().unwrap()
            })
        })
        .collect();
    let bodies: Vec<String> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn cors_headers_are_present() {
    let base = tiny_server();
    let resp = agent()
        .get(format!("{base}/api/models"))
        .header("Origin", "http://example.test")
        .call()
        .unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
