//! An in-process completions server for exercising [`HttpBackend`]
//! without network access.
//!
//! Requests are answered by any [`Backend`], with log-probability lists
//! cut to the top `k` entries the way hosted APIs return them. Every
//! request body is captured, and the peak number of concurrent requests is
//! tracked.
//!
//! [`HttpBackend`]: crate::backend::HttpBackend

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::{json, Value};

use crate::backend::{Backend, FinishReason, SamplingParams};
use crate::density::TokenLogprob;

#[derive(Debug, Clone)]
pub struct MockOptions {
    /// Alternatives kept per position.
    pub top_k: usize,
    /// Artificial latency per request.
    pub delay: Duration,
    /// Number of initial requests answered with `fail_status`.
    pub fail_first: usize,
    pub fail_status: u16,
}

impl Default for MockOptions {
    fn default() -> Self {
        Self {
            top_k: 5,
            delay: Duration::ZERO,
            fail_first: 0,
            fail_status: 503,
        }
    }
}

struct State {
    backend: Box<dyn Backend>,
    options: MockOptions,
    requests: Mutex<Vec<Value>>,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    failures_left: AtomicUsize,
}

pub struct MockServer {
    url: String,
    server: Arc<tiny_http::Server>,
    state: Arc<State>,
    accept: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(backend: impl Backend + 'static, options: MockOptions) -> std::io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let port = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("server has no IP address"))?
            .port();
        let server = Arc::new(server);
        let state = Arc::new(State {
            backend: Box::new(backend),
            failures_left: AtomicUsize::new(options.fail_first),
            options,
            requests: Mutex::new(Vec::new()),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        });
        let accept = {
            let server = Arc::clone(&server);
            let state = Arc::clone(&state);
            std::thread::spawn(move || {
                for request in server.incoming_requests() {
                    let state = Arc::clone(&state);
                    std::thread::spawn(move || handle(&state, request));
                }
            })
        };
        Ok(Self {
            url: format!("http://127.0.0.1:{port}"),
            server,
            state,
            accept: Some(accept),
        })
    }

    /// Base URL to put in [`HttpConfig::base_url`](crate::backend::HttpConfig).
    pub fn url(&self) -> &str {
        &self.url
    }

    /// Parsed bodies of all requests received so far, in arrival order.
    pub fn requests(&self) -> Vec<Value> {
        self.state.requests.lock().expect("requests lock").clone()
    }

    /// Highest number of requests that were being handled at once.
    pub fn max_concurrency(&self) -> usize {
        self.state.max_in_flight.load(Ordering::SeqCst)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

fn handle(state: &State, mut request: tiny_http::Request) {
    let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.max_in_flight.fetch_max(now, Ordering::SeqCst);
    let mut body = String::new();
    let (status, reply) = if request.url() != "/v1/completions" {
        (404, json!({"error": "not found"}))
    } else if request.as_reader().read_to_string(&mut body).is_err() {
        (400, json!({"error": "unreadable body"}))
    } else {
        match serde_json::from_str::<Value>(&body) {
            Ok(v) => {
                state.requests.lock().expect("requests lock").push(v.clone());
                std::thread::sleep(state.options.delay);
                let fail = state
                    .failures_left
                    .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
                    .is_ok();
                if fail {
                    (state.options.fail_status, json!({"error": "injected failure"}))
                } else {
                    respond(state, &v)
                }
            }
            Err(e) => (400, json!({"error": e.to_string()})),
        }
    };
    state.in_flight.fetch_sub(1, Ordering::SeqCst);
    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("header");
    let response = tiny_http::Response::from_string(reply.to_string())
        .with_status_code(status)
        .with_header(header);
    let _ = request.respond(response);
}

fn respond(state: &State, req: &Value) -> (u16, Value) {
    let prompt = req["prompt"].as_str().unwrap_or_default();
    let top_k = req["logprobs"].as_u64().map(|k| (k as usize).min(state.options.top_k));
    if req["echo"].as_bool() == Some(true) {
        let scored = match state.backend.score("", prompt, &SamplingParams::default()) {
            Ok(s) => s,
            Err(e) => return (400, json!({"error": e.to_string()})),
        };
        let logprobs = top_k.map(|k| logprobs_json(&scored.tokens, k));
        return (
            200,
            json!({"choices": [{"text": prompt, "index": 0, "finish_reason": "length", "logprobs": logprobs}]}),
        );
    }
    let bias: Option<BTreeMap<String, f64>> = serde_json::from_value(req["logit_bias"].clone()).ok();
    let params = SamplingParams {
        n_samples: req["n"].as_u64().unwrap_or(1) as usize,
        max_new_tokens: req["max_tokens"].as_u64().unwrap_or(16) as usize,
        temperature: req["temperature"].as_f64().unwrap_or(1.0),
        top_p: req["top_p"].as_f64().unwrap_or(1.0),
        allowed_token_bias: bias,
        stop: req["stop"].as_str().map(str::to_string),
        logprobs: top_k,
        seed: req["seed"].as_u64().unwrap_or(0),
        token_budget: usize::MAX,
    };
    match state.backend.complete(prompt, &params) {
        Ok(completions) => {
            let choices: Vec<Value> = completions
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let logprobs = match (top_k, &c.token_logprobs) {
                        (Some(k), Some(t)) => logprobs_json(t, k),
                        _ => Value::Null,
                    };
                    let finish = match c.finish_reason {
                        FinishReason::Stop => "stop",
                        FinishReason::Length => "length",
                        FinishReason::Error => "error",
                    };
                    json!({"text": c.text, "index": i, "finish_reason": finish, "logprobs": logprobs})
                })
                .collect();
            (200, json!({"choices": choices}))
        }
        Err(e) => (400, json!({"error": e.to_string()})),
    }
}

fn logprobs_json(tokens: &[TokenLogprob], k: usize) -> Value {
    let mut offset = 0;
    let mut offsets = Vec::new();
    let mut tops = Vec::new();
    for t in tokens {
        offsets.push(offset);
        offset += t.token.len();
        let mut ranked: Vec<(&String, &f64)> = t.top.iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let top: BTreeMap<&String, &f64> = ranked.into_iter().take(k).collect();
        tops.push(top);
    }
    json!({
        "tokens": tokens.iter().map(|t| &t.token).collect::<Vec<_>>(),
        "token_logprobs": tokens.iter().map(|t| t.logprob).collect::<Vec<_>>(),
        "top_logprobs": tops,
        "text_offset": offsets,
    })
}
