//! Text-model backends behind one interface.
//!
//! - [`HttpBackend`]: OpenAI-compatible `/v1/completions` endpoints.
//! - [`DecimalArBackend`]: the local n-gram model, either pretrained or
//!   fitted to each prompt as it arrives.
//! - [`ReplayBackend`] / [`RecordingBackend`]: fixture files keyed by a
//!   content hash of the request.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::TokenLogprob;
use crate::{Error, Result};

mod decimal_ar;
mod http;
mod replay;

pub use decimal_ar::DecimalArBackend;
pub use http::{HttpBackend, HttpConfig};
pub use replay::{Fixture, FixtureResponse, RecordingBackend, ReplayBackend};

/// Generation controls shared by every backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub n_samples: usize,
    /// Tokens to generate per sample; 0 lets the forecaster derive it from
    /// the horizon.
    pub max_new_tokens: usize,
    pub temperature: f64,
    pub top_p: f64,
    /// Additive logit bias per token.
    pub allowed_token_bias: Option<BTreeMap<String, f64>>,
    pub stop: Option<String>,
    /// Number of alternatives to request per position.
    pub logprobs: Option<usize>,
    pub seed: u64,
    /// Upper bound on `n_samples * max_new_tokens` per call.
    pub token_budget: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            n_samples: 20,
            max_new_tokens: 0,
            temperature: 0.7,
            top_p: 1.0,
            allowed_token_bias: None,
            stop: None,
            logprobs: None,
            seed: 0,
            token_budget: 200_000,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be >= 1".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig("temperature must be > 0".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::InvalidConfig("top_p must be in (0, 1]".into()));
        }
        Ok(())
    }

    /// Checks the token budget for a sampling call.
    pub fn check_budget(&self) -> Result<()> {
        let requested = self.n_samples.saturating_mul(self.max_new_tokens);
        if requested > self.token_budget {
            return Err(Error::BudgetExceeded {
                requested,
                budget: self.token_budget,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Length,
    Stop,
    Error,
}

/// One sampled continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub token_logprobs: Option<Vec<TokenLogprob>>,
    pub finish_reason: FinishReason,
}

/// Per-token log-probabilities of a scored continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub tokens: Vec<TokenLogprob>,
}

impl ScoreResult {
    pub fn total_logprob(&self) -> f64 {
        self.tokens.iter().map(|t| t.logprob).sum()
    }
}

/// An autoregressive text model.
pub trait Backend: Send + Sync {
    /// Stable identifier recorded in run manifests.
    fn id(&self) -> String;

    /// Draws `params.n_samples` independent continuations of `prompt`.
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<CompletionResult>>;

    /// Log-probabilities of the tokens of `continuation` given `prompt`.
    fn score(&self, prompt: &str, continuation: &str, params: &SamplingParams) -> Result<ScoreResult>;

    /// Average characters per token, for prompt budgeting.
    fn chars_per_token(&self) -> f64 {
        1.0
    }

    /// Content hashes of the fixtures read or written so far.
    fn fixture_keys(&self) -> Vec<String> {
        Vec::new()
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<CompletionResult>> {
        (**self).complete(prompt, params)
    }
    fn score(&self, prompt: &str, continuation: &str, params: &SamplingParams) -> Result<ScoreResult> {
        (**self).score(prompt, continuation, params)
    }
    fn chars_per_token(&self) -> f64 {
        (**self).chars_per_token()
    }
    fn fixture_keys(&self) -> Vec<String> {
        (**self).fixture_keys()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Complete,
    Score,
}

/// Content hash identifying a request, independent of which backend
/// serves it.
pub fn request_key(
    kind: RequestKind,
    prompt: &str,
    continuation: &str,
    params: &SamplingParams,
) -> String {
    #[derive(Serialize)]
    struct Keyed<'a> {
        kind: RequestKind,
        prompt: &'a str,
        continuation: &'a str,
        params: &'a SamplingParams,
    }
    let canonical = serde_json::to_vec(&Keyed {
        kind,
        prompt,
        continuation,
        params,
    })
    .expect("params serialize");
    hex::encode(Sha256::digest(&canonical))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_every_input() {
        let p = SamplingParams::default();
        let base = request_key(RequestKind::Complete, "1 ,", "", &p);
        assert_eq!(base, request_key(RequestKind::Complete, "1 ,", "", &p));
        assert_ne!(base, request_key(RequestKind::Score, "1 ,", "", &p));
        assert_ne!(base, request_key(RequestKind::Complete, "2 ,", "", &p));
        assert_ne!(base, request_key(RequestKind::Complete, "1 ,", "x", &p));
        let q = SamplingParams { seed: 1, ..p };
        assert_ne!(base, request_key(RequestKind::Complete, "1 ,", "", &q));
        assert_eq!(base.len(), 64);
    }

    #[test]
    fn budget_and_validation() {
        let p = SamplingParams {
            n_samples: 10,
            max_new_tokens: 100,
            token_budget: 999,
            ..Default::default()
        };
        assert!(matches!(p.check_budget(), Err(Error::BudgetExceeded { requested: 1000, .. })));
        assert!(SamplingParams { n_samples: 0, ..Default::default() }.validate().is_err());
        assert!(SamplingParams { top_p: 1.5, ..Default::default() }.validate().is_err());
        assert!(SamplingParams { temperature: 0.0, ..Default::default() }.validate().is_err());
    }
}
