use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Backend, CompletionResult, FinishReason, ScoreResult, SamplingParams};
use crate::decimal_ar::{DecimalArConfig, DecimalArModel, SampleOptions};
use crate::density::TokenLogprob;
use crate::Result;

enum Mode {
    Fixed(DecimalArModel),
    /// Fit a fresh model to every prompt before continuing it.
    InContext(DecimalArConfig),
}

/// The local n-gram model as a backend. Exposes the full next-character
/// distribution at every scored position.
pub struct DecimalArBackend {
    mode: Mode,
    seed: u64,
}

impl DecimalArBackend {
    pub fn fixed(model: DecimalArModel) -> Self {
        let seed = model.config().seed;
        Self {
            mode: Mode::Fixed(model),
            seed,
        }
    }

    /// Learns from each prompt, the way a pretrained model conditions on
    /// its context.
    pub fn in_context(config: DecimalArConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        Ok(Self {
            mode: Mode::InContext(config),
            seed,
        })
    }

    fn model_for(&self, prompt: &str) -> Result<std::borrow::Cow<'_, DecimalArModel>> {
        Ok(match &self.mode {
            Mode::Fixed(m) => std::borrow::Cow::Borrowed(m),
            Mode::InContext(cfg) => {
                std::borrow::Cow::Owned(DecimalArModel::train(&[prompt], cfg.clone())?)
            }
        })
    }

    /// Per-sample RNG derived from the request, so results do not depend
    /// on call order.
    fn rng(&self, prompt: &str, params: &SamplingParams, index: usize) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(params.seed.to_le_bytes());
        h.update((index as u64).to_le_bytes());
        h.update(prompt.as_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}

impl Backend for DecimalArBackend {
    fn id(&self) -> String {
        let m = match &self.mode {
            Mode::Fixed(m) => format!("fixed,order={}", m.config().order),
            Mode::InContext(c) => format!("in-context,order={},smoothing={}", c.order, c.smoothing),
        };
        format!("decimal-ar({m},seed={})", self.seed)
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<CompletionResult>> {
        params.validate()?;
        params.check_budget()?;
        let model = self.model_for(prompt)?;
        let opts = SampleOptions {
            max_chars: params.max_new_tokens,
            temperature: params.temperature,
            top_p: params.top_p,
            bias: params.allowed_token_bias.as_ref(),
            stop: params.stop.as_deref(),
        };
        (0..params.n_samples)
            .map(|i| {
                let mut rng = self.rng(prompt, params, i);
                let text = model.sample(prompt, &opts, &mut rng)?;
                let stopped = params
                    .stop
                    .as_deref()
                    .is_some_and(|s| !s.is_empty() && text.ends_with(s));
                let token_logprobs = params
                    .logprobs
                    .map(|_| token_logprobs(&model, prompt, &text));
                Ok(CompletionResult {
                    text,
                    token_logprobs,
                    finish_reason: if stopped {
                        FinishReason::Stop
                    } else {
                        FinishReason::Length
                    },
                })
            })
            .collect()
    }

    fn score(&self, prompt: &str, continuation: &str, _params: &SamplingParams) -> Result<ScoreResult> {
        let model = self.model_for(prompt)?;
        // Validates the alphabet before building per-position maps.
        model.logprobs(prompt, continuation)?;
        Ok(ScoreResult {
            tokens: token_logprobs(&model, prompt, continuation),
        })
    }
}

fn token_logprobs(model: &DecimalArModel, prompt: &str, text: &str) -> Vec<TokenLogprob> {
    model
        .position_distributions(prompt, text)
        .into_iter()
        .zip(text.chars())
        .map(|(dist, c)| {
            let top: crate::density::LogprobMap =
                dist.iter().map(|(ch, lp)| (ch.to_string(), *lp)).collect();
            TokenLogprob {
                token: c.to_string(),
                logprob: top.get(&c.to_string()).copied().unwrap_or(f64::NEG_INFINITY),
                top,
            }
        })
        .collect()
}
