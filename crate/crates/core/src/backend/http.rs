use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, CompletionResult, FinishReason, SamplingParams, ScoreResult};
use crate::density::{LogprobMap, TokenLogprob};
use crate::{Error, Result};

/// Connection settings for an OpenAI-compatible completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Base URL without the `/v1/completions` suffix.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token, if any.
    pub api_key_env: String,
    /// Maximum number of requests in flight.
    pub parallelism: usize,
    /// Completions requested per HTTP call.
    pub max_n_per_request: usize,
    pub max_attempts: usize,
    pub initial_backoff_ms: u64,
    pub timeout_secs: u64,
    pub chars_per_token: f64,
    /// Alternatives requested per position when scoring.
    pub score_logprobs: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000".into(),
            model: "default".into(),
            api_key_env: "DIGITCAST_API_KEY".into(),
            parallelism: 4,
            max_n_per_request: 20,
            max_attempts: 5,
            initial_backoff_ms: 500,
            timeout_secs: 120,
            chars_per_token: 1.0,
            score_logprobs: 5,
        }
    }
}

#[derive(Debug, Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    n: usize,
    max_tokens: usize,
    temperature: f64,
    top_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    logprobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    logit_bias: Option<&'a BTreeMap<String, f64>>,
    echo: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: Option<&'a str>,
    seed: u64,
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    text: String,
    #[serde(default)]
    index: Option<usize>,
    #[serde(default)]
    finish_reason: Option<String>,
    #[serde(default)]
    logprobs: Option<ChoiceLogprobs>,
}

#[derive(Debug, Deserialize)]
struct ChoiceLogprobs {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    #[serde(default)]
    top_logprobs: Option<Vec<Option<LogprobMap>>>,
    #[serde(default)]
    text_offset: Option<Vec<usize>>,
}

impl ChoiceLogprobs {
    fn into_tokens(self, from_offset: usize) -> Result<Vec<TokenLogprob>> {
        let n = self.tokens.len();
        if self.token_logprobs.len() != n {
            return Err(Error::MalformedResponse(
                "logprobs.tokens and logprobs.token_logprobs differ in length".into(),
            ));
        }
        let offsets = match self.text_offset {
            Some(o) if o.len() == n => o,
            Some(_) => {
                return Err(Error::MalformedResponse(
                    "logprobs.text_offset has the wrong length".into(),
                ))
            }
            None if from_offset == 0 => {
                let mut acc = 0;
                self.tokens
                    .iter()
                    .map(|t| {
                        let o = acc;
                        acc += t.len();
                        o
                    })
                    .collect()
            }
            None => {
                return Err(Error::MalformedResponse(
                    "echo scoring needs logprobs.text_offset".into(),
                ))
            }
        };
        let mut tops = self.top_logprobs.unwrap_or_default();
        tops.resize(n, None);
        let mut out = Vec::new();
        for (((token, lp), top), offset) in self
            .tokens
            .into_iter()
            .zip(self.token_logprobs)
            .zip(tops)
            .zip(offsets)
        {
            if offset < from_offset {
                continue;
            }
            let logprob = lp.ok_or_else(|| {
                Error::MalformedResponse(format!("missing logprob for token {token:?}"))
            })?;
            out.push(TokenLogprob {
                token,
                logprob,
                top: top.unwrap_or_default(),
            });
        }
        Ok(out)
    }
}

/// Client for `POST {base_url}/v1/completions`.
pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self> {
        if config.parallelism == 0 || config.max_n_per_request == 0 || config.max_attempts == 0 {
            return Err(Error::InvalidConfig(
                "parallelism, max_n_per_request and max_attempts must be >= 1".into(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("http client: {e}")))?;
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        Ok(Self {
            config,
            client,
            api_key,
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/v1/completions", self.config.base_url.trim_end_matches('/'))
    }

    /// Sends one request, retrying transport failures, 429 and 5xx with
    /// exponential backoff.
    fn post(&self, body: &CompletionRequest<'_>) -> Result<CompletionResponse> {
        let url = self.endpoint();
        let mut last = String::new();
        for attempt in 0..self.config.max_attempts {
            if attempt > 0 {
                let delay = self.config.initial_backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(delay));
            }
            let mut req = self.client.post(&url).json(body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            let resp = match req.send() {
                Ok(r) => r,
                Err(e) => {
                    last = e.to_string();
                    log::warn!("attempt {} to {url} failed: {last}", attempt + 1);
                    continue;
                }
            };
            let status = resp.status();
            let text = resp.text().map_err(|e| Error::Transport {
                attempts: attempt + 1,
                message: e.to_string(),
            });
            if status.as_u16() == 429 || status.is_server_error() {
                last = format!("HTTP {status}");
                log::warn!("attempt {} to {url}: {last}", attempt + 1);
                continue;
            }
            let text = text?;
            if !status.is_success() {
                return Err(Error::Transport {
                    attempts: attempt + 1,
                    message: format!("HTTP {status}: {text}"),
                });
            }
            return serde_json::from_str(&text).map_err(|e| Error::MalformedResponse(e.to_string()));
        }
        Err(Error::Transport {
            attempts: self.config.max_attempts,
            message: last,
        })
    }

    /// Runs `jobs` with at most `parallelism` of them in flight, keeping
    /// results in job order.
    fn run_parallel<T: Send>(&self, jobs: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..jobs).map(|_| None).collect());
        let workers = self.config.parallelism.min(jobs);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= jobs {
                        break;
                    }
                    let r = f(i);
                    results.lock().expect("results lock")[i] = Some(r);
                });
            }
        });
        results
            .into_inner()
            .expect("results lock")
            .into_iter()
            .map(|r| r.expect("every job ran"))
            .collect()
    }
}

fn parse_finish(reason: Option<&str>) -> FinishReason {
    match reason {
        Some("stop") => FinishReason::Stop,
        Some("length") | None => FinishReason::Length,
        Some(_) => FinishReason::Error,
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> String {
        format!("http({},{})", self.config.base_url, self.config.model)
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<CompletionResult>> {
        params.validate()?;
        params.check_budget()?;
        let per = self.config.max_n_per_request;
        let batches = params.n_samples.div_ceil(per);
        let chunks = self.run_parallel(batches, |b| {
            let n = per.min(params.n_samples - b * per);
            let body = CompletionRequest {
                model: &self.config.model,
                prompt,
                n,
                max_tokens: params.max_new_tokens,
                temperature: params.temperature,
                top_p: params.top_p,
                logprobs: params.logprobs,
                logit_bias: params.allowed_token_bias.as_ref(),
                echo: false,
                stop: params.stop.as_deref(),
                seed: params.seed.wrapping_add(b as u64),
            };
            let mut resp = self.post(&body)?;
            if resp.choices.len() != n {
                return Err(Error::MalformedResponse(format!(
                    "expected {n} choices, got {}",
                    resp.choices.len()
                )));
            }
            resp.choices.sort_by_key(|c| c.index.unwrap_or(0));
            resp.choices
                .into_iter()
                .map(|c| {
                    let token_logprobs = match (params.logprobs, c.logprobs) {
                        (Some(_), Some(lp)) => Some(lp.into_tokens(0)?),
                        _ => None,
                    };
                    Ok(CompletionResult {
                        finish_reason: parse_finish(c.finish_reason.as_deref()),
                        text: c.text,
                        token_logprobs,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(chunks.into_iter().flatten().collect())
    }

    fn score(&self, prompt: &str, continuation: &str, _params: &SamplingParams) -> Result<ScoreResult> {
        let full = format!("{prompt}{continuation}");
        let body = CompletionRequest {
            model: &self.config.model,
            prompt: &full,
            n: 1,
            max_tokens: 0,
            temperature: 1.0,
            top_p: 1.0,
            logprobs: Some(self.config.score_logprobs),
            logit_bias: None,
            echo: true,
            stop: None,
            seed: 0,
        };
        let resp = self.post(&body)?;
        let choice = resp
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Error::MalformedResponse("no choices".into()))?;
        let unsupported = || Error::Unsupported {
            backend: self.id(),
            capability: "echo scoring",
        };
        let lp = choice.logprobs.ok_or_else(unsupported)?;
        if lp.text_offset.is_none() || !choice.text.starts_with(&full) {
            return Err(unsupported());
        }
        Ok(ScoreResult {
            tokens: lp.into_tokens(prompt.len())?,
        })
    }

    fn chars_per_token(&self) -> f64 {
        self.config.chars_per_token
    }
}
