mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use common::{Response, StubServer};
use kgedit::embedding::{EmbeddingProvider, HttpEmbedder};
use kgedit::llm::{HttpCompletionClient, HttpLlmConfig, PayloadShape};
use kgedit::{CompletionPort, CompletionRequest, LlmFailure};
use serde_json::{json, Value};

fn client(url: &str, shape: PayloadShape) -> HttpCompletionClient {
    let mut cfg = HttpLlmConfig::new(url, "test-model");
    cfg.shape = shape;
    cfg.timeout = Duration::from_secs(5);
    HttpCompletionClient::new(cfg)
}

#[test]
fn completion_shape_round_trip() {
    let seen = Arc::new(Mutex::new(Value::Null));
    let sink = Arc::clone(&seen);
    let server = StubServer::start(move |req| {
        *sink.lock().unwrap() = serde_json::from_str(&req.body).unwrap();
        Response::json(json!({"choices": [{"text": " Eeyore->creator->?x\n\nextra"}]}).to_string())
    });
    let req = CompletionRequest::new("Question: who?\nChain:")
        .max_tokens(64)
        .stop("\n\n");
    let out = client(&server.url, PayloadShape::Completion)
        .complete(&req)
        .unwrap();
    assert_eq!(out, " Eeyore->creator->?x");
    let body = seen.lock().unwrap().clone();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["prompt"], "Question: who?\nChain:");
    assert_eq!(body["max_tokens"], 64);
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["stop"], json!(["\n\n"]));
}

#[test]
fn chat_shape_round_trip() {
    let seen = Arc::new(Mutex::new(Value::Null));
    let sink = Arc::clone(&seen);
    let server = StubServer::start(move |req| {
        *sink.lock().unwrap() = serde_json::from_str(&req.body).unwrap();
        Response::json(
            json!({"choices": [{"message": {"role": "assistant", "content": "London"}}]})
                .to_string(),
        )
    });
    let out = client(&server.url, PayloadShape::Chat)
        .complete(&CompletionRequest::new("Question: capital?\nAnswer:"))
        .unwrap();
    assert_eq!(out, "London");
    let body = seen.lock().unwrap().clone();
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(
        body["messages"][0]["content"],
        "Question: capital?\nAnswer:"
    );
    assert!(body.get("prompt").is_none());
}

#[test]
fn rate_limit_is_retried_then_reported_as_transport() {
    let server = StubServer::start(|_| Response::status(429));
    let err = client(&server.url, PayloadShape::Completion)
        .complete(&CompletionRequest::new("hello"))
        .unwrap_err();
    assert!(
        matches!(err, LlmFailure::Transport(ref m) if m.contains("429")),
        "{err:?}"
    );
    assert_eq!(server.hits(), 2);
}

#[test]
fn server_error_recovers_on_retry() {
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&calls);
    let server = StubServer::start(move |_| {
        if counter.fetch_add(1, Ordering::SeqCst) == 0 {
            Response::status(503)
        } else {
            Response::json(r#"{"choices":[{"text":"ok"}]}"#)
        }
    });
    let out = client(&server.url, PayloadShape::Completion)
        .complete(&CompletionRequest::new("hello"))
        .unwrap();
    assert_eq!(out, "ok");
}

#[test]
fn client_errors_are_not_retried() {
    let server = StubServer::start(|_| Response::status(400));
    let err = client(&server.url, PayloadShape::Completion)
        .complete(&CompletionRequest::new("hello"))
        .unwrap_err();
    assert!(matches!(err, LlmFailure::Transport(_)));
    assert_eq!(server.hits(), 1);
}

#[test]
fn malformed_body_is_reported() {
    let server = StubServer::start(|_| Response::json(r#"{"data": []}"#));
    let err = client(&server.url, PayloadShape::Completion)
        .complete(&CompletionRequest::new("hello"))
        .unwrap_err();
    assert!(matches!(err, LlmFailure::MalformedPayload(_)));
}

#[test]
fn empty_prompt_is_rejected_without_a_request() {
    let server = StubServer::start(|_| Response::json(r#"{"choices":[{"text":"x"}]}"#));
    let err = client(&server.url, PayloadShape::Completion)
        .complete(&CompletionRequest::new("  "))
        .unwrap_err();
    assert!(matches!(err, LlmFailure::MalformedPayload(_)));
    assert_eq!(server.hits(), 0);
}

#[test]
fn slow_server_times_out() {
    let server = StubServer::start(|_| {
        std::thread::sleep(Duration::from_millis(1500));
        Response::json(r#"{"choices":[{"text":"late"}]}"#)
    });
    let mut cfg = HttpLlmConfig::new(&server.url, "m");
    cfg.timeout = Duration::from_millis(300);
    cfg.retries = 0;
    let err = HttpCompletionClient::new(cfg)
        .complete(&CompletionRequest::new("hello"))
        .unwrap_err();
    assert!(matches!(err, LlmFailure::Timeout(_)), "{err:?}");
}

#[test]
fn bearer_token_comes_from_the_named_variable() {
    std::env::set_var("KGEDIT_TEST_LLM_KEY", "sekrit");
    let auth = Arc::new(Mutex::new(None));
    let sink = Arc::clone(&auth);
    let server = StubServer::start(move |req| {
        *sink.lock().unwrap() = req.header("authorization").map(str::to_owned);
        Response::json(r#"{"choices":[{"text":"x"}]}"#)
    });
    let mut cfg = HttpLlmConfig::new(&server.url, "m");
    cfg.api_key_env = Some("KGEDIT_TEST_LLM_KEY".into());
    HttpCompletionClient::new(cfg)
        .complete(&CompletionRequest::new("hello"))
        .unwrap();
    assert_eq!(auth.lock().unwrap().as_deref(), Some("Bearer sekrit"));
}

#[test]
fn embedding_endpoint_round_trip() {
    let server = StubServer::start(|req| {
        let body: Value = serde_json::from_str(&req.body).unwrap();
        let vectors: Vec<Vec<f32>> = body["texts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| vec![t.as_str().unwrap().len() as f32, 0.0, 3.0])
            .collect();
        Response::json(json!({ "vectors": vectors }).to_string())
    });
    let embedder = HttpEmbedder::new(&server.url, Duration::from_secs(5));
    let out = embedder
        .embed(&["abcd".to_string(), "".to_string()])
        .unwrap();
    assert_eq!(out.len(), 2);
    assert!((out[0][0] - 0.8).abs() < 1e-6 && (out[0][2] - 0.6).abs() < 1e-6);
    assert_eq!(out[1], vec![0.0, 0.0, 1.0]);
}

#[test]
fn embedding_count_mismatch_is_malformed() {
    let server = StubServer::start(|_| Response::json(r#"{"vectors": [[1.0]]}"#));
    let embedder = HttpEmbedder::new(&server.url, Duration::from_secs(5));
    let err = embedder
        .embed(&["a".to_string(), "b".to_string()])
        .unwrap_err();
    assert!(matches!(err, LlmFailure::MalformedPayload(_)));
    let down = StubServer::start(|_| Response::status(500));
    let err = HttpEmbedder::new(&down.url, Duration::from_secs(5))
        .embed(&["a".to_string()])
        .unwrap_err();
    assert!(matches!(err, LlmFailure::Transport(_)));
}
