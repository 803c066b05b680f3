//! The forecasting pipeline: rescale, encode, truncate, sample, decode,
//! invert and summarize; plus likelihood evaluation and grid tuning.

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, SamplingParams};
use crate::codec::{decode_series, encode_chunks, encode_continuation, EncodingConfig};
use crate::density::{continuation_nll_per_dim, DigitDistribution};
use crate::scaler::{self, ScalerConfig, ScalerParams};
use crate::series::TimeSeries;
use crate::stats;
use crate::{Error, Result};

/// Headroom on the generation length derived from the horizon.
const MAX_TOKENS_SAFETY: f64 = 1.3;
/// Logit bias that rules a token out in practice.
const SUPPRESS_BIAS: f64 = -100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastConfig {
    pub scaler: ScalerConfig,
    pub encoding: EncodingConfig,
    pub sampling: SamplingParams,
    pub horizon: usize,
    /// Keep at most this many of the latest observations.
    pub max_history: Option<usize>,
    /// Prompt length limit in backend tokens.
    pub context_token_budget: usize,
    pub quantile_levels: Vec<f64>,
    /// Extra sampling rounds used to replace unusable completions.
    pub top_up_rounds: usize,
    /// Fewest usable samples accepted; defaults to `max(2, n/2)`.
    pub min_valid: Option<usize>,
    /// Bias sampling away from the characters of the missing-value token.
    pub suppress_missing: bool,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            scaler: ScalerConfig::default(),
            encoding: EncodingConfig::default(),
            sampling: SamplingParams::default(),
            horizon: 1,
            max_history: None,
            context_token_budget: 4096,
            quantile_levels: vec![0.1, 0.5, 0.9],
            top_up_rounds: 3,
            min_valid: None,
            suppress_missing: true,
        }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be >= 1".into()));
        }
        if self.max_history == Some(0) {
            return Err(Error::InvalidConfig("max_history must be >= 1".into()));
        }
        if self
            .quantile_levels
            .iter()
            .any(|q| !(0.0..=1.0).contains(q))
        {
            return Err(Error::InvalidConfig("quantile levels must be in [0, 1]".into()));
        }
        self.scaler.validate()?;
        self.encoding.validate()?;
        self.sampling.validate()
    }

    pub fn min_valid(&self) -> usize {
        let n = self.sampling.n_samples;
        self.min_valid.unwrap_or_else(|| (n / 2).max(2)).min(n)
    }
}

/// An encoded, truncated history ready to send.
#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub text: String,
    pub scaler: ScalerParams,
    /// Index of the first observation kept in the prompt.
    pub history_start: usize,
    /// Estimated prompt length in backend tokens.
    pub tokens: f64,
}

/// Fits the scaler on `history`, encodes it and drops the oldest steps
/// until both `max_history` and the token budget are met.
pub fn build_prompt(history: &TimeSeries, cfg: &ForecastConfig, chars_per_token: f64) -> Result<Prompt> {
    cfg.validate()?;
    if !(chars_per_token > 0.0) {
        return Err(Error::InvalidConfig("chars_per_token must be > 0".into()));
    }
    let params = scaler::fit(history, &cfg.scaler)?;
    let chunks = encode_chunks(&scaler::transform(history, &params), &cfg.encoding)?;
    let n = chunks.len();
    let sep = cfg.encoding.time_sep.chars().count();
    let term = cfg.encoding.terminator().chars().count();
    // chars[i]: length of the prompt made of chunks[i..].
    let mut chars = vec![0usize; n + 1];
    for i in (0..n).rev() {
        let tail = if i + 1 == n { term } else { sep };
        chars[i] = chars[i + 1] + chunks[i].chars().count() + tail;
    }
    let mut start = cfg.max_history.map_or(0, |m| n.saturating_sub(m));
    let tokens = |i: usize| chars[i] as f64 / chars_per_token;
    while start + 1 < n && tokens(start) > cfg.context_token_budget as f64 {
        start += 1;
    }
    if tokens(start) > cfg.context_token_budget as f64 {
        return Err(Error::BudgetExceeded {
            requested: tokens(start).ceil() as usize,
            budget: cfg.context_token_budget,
        });
    }
    let text = crate::codec::join_chunks(&chunks[start..], &cfg.encoding);
    Ok(Prompt {
        text,
        scaler: params,
        history_start: start,
        tokens: tokens(start),
    })
}

/// Generation length for `horizon` steps at the prompt's token rate.
pub fn derive_max_new_tokens(prompt: &Prompt, history_len: usize, horizon: usize) -> usize {
    let kept = (history_len - prompt.history_start).max(1) as f64;
    let per_value = prompt.tokens / kept;
    ((horizon as f64 * per_value * MAX_TOKENS_SAFETY).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    /// `samples[i][t]` in data units.
    pub samples: Vec<Vec<f64>>,
    pub quantile_levels: Vec<f64>,
    /// One row per quantile level.
    pub quantiles: Vec<Vec<f64>>,
    pub point: Vec<f64>,
    pub valid_sample_count: usize,
    pub nll_per_dim: Option<f64>,
    pub scaler: ScalerParams,
    pub history_start: usize,
    pub max_new_tokens: usize,
    pub sampling_rounds: usize,
    #[serde(skip)]
    pub prompt: String,
}

/// Sampling bias with the missing-token characters pushed down, leaving
/// characters shared with numbers and separators alone.
fn sampling_bias(cfg: &ForecastConfig) -> Option<std::collections::BTreeMap<String, f64>> {
    let mut bias = cfg.sampling.allowed_token_bias.clone();
    if cfg.suppress_missing {
        let enc = &cfg.encoding;
        let map = bias.get_or_insert_with(Default::default);
        for c in enc.missing_token.chars() {
            let shared = c.is_ascii_digit()
                || c == '-'
                || enc.time_sep.contains(c)
                || enc.digit_sep.contains(c);
            if !shared {
                map.insert(c.to_string(), SUPPRESS_BIAS);
            }
        }
    }
    bias
}

/// First `horizon` values of a completion when all are present, dropping a
/// trailing unterminated value.
fn usable_steps(text: &str, cfg: &EncodingConfig, horizon: usize) -> Option<Vec<f64>> {
    let complete = &text[..text.rfind(cfg.split_pattern())? + cfg.split_pattern().len()];
    let decoded = decode_series(complete, cfg);
    if decoded.valid_steps < horizon {
        return None;
    }
    (0..horizon).map(|t| decoded.series.get(t)).collect()
}

/// Samples a probabilistic forecast of the next `cfg.horizon` steps.
pub fn forecast<B: Backend + ?Sized>(history: &TimeSeries, backend: &B, cfg: &ForecastConfig) -> Result<Forecast> {
    if history.observed_count() == 0 {
        return Err(Error::EmptySeries);
    }
    let prompt = build_prompt(history, cfg, backend.chars_per_token())?;
    let n = cfg.sampling.n_samples;
    let max_new_tokens = match cfg.sampling.max_new_tokens {
        0 => derive_max_new_tokens(&prompt, history.len(), cfg.horizon),
        m => m,
    };
    let allowed_token_bias = sampling_bias(cfg);
    let mut scaled_samples: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut rounds = 0;
    while scaled_samples.len() < n && rounds <= cfg.top_up_rounds {
        let params = SamplingParams {
            n_samples: n - scaled_samples.len(),
            max_new_tokens,
            seed: cfg.sampling.seed.wrapping_add(rounds as u64),
            allowed_token_bias: allowed_token_bias.clone(),
            ..cfg.sampling.clone()
        };
        rounds += 1;
        for c in backend.complete(&prompt.text, &params)? {
            if scaled_samples.len() == n {
                break;
            }
            if let Some(steps) = usable_steps(&c.text, &cfg.encoding, cfg.horizon) {
                scaled_samples.push(steps);
            }
        }
    }
    let required = cfg.min_valid();
    if scaled_samples.len() < required {
        return Err(Error::InsufficientSamples {
            valid: scaled_samples.len(),
            required,
        });
    }
    let samples: Vec<Vec<f64>> = scaled_samples
        .into_iter()
        .map(|row| row.into_iter().map(|x| prompt.scaler.invert(x)).collect())
        .collect();
    let (quantiles, point) = summarize(&samples, cfg.horizon, &cfg.quantile_levels);
    Ok(Forecast {
        valid_sample_count: samples.len(),
        samples,
        quantile_levels: cfg.quantile_levels.clone(),
        quantiles,
        point,
        nll_per_dim: None,
        scaler: prompt.scaler,
        history_start: prompt.history_start,
        max_new_tokens,
        sampling_rounds: rounds,
        prompt: prompt.text,
    })
}

/// Per-step quantile rows and the median.
pub fn summarize(samples: &[Vec<f64>], horizon: usize, levels: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let columns: Vec<Vec<f64>> = (0..horizon)
        .map(|t| {
            let mut col: Vec<f64> = samples.iter().map(|s| s[t]).collect();
            stats::sort_floats(&mut col);
            col
        })
        .collect();
    let quantiles = levels
        .iter()
        .map(|&q| columns.iter().map(|c| stats::quantile_sorted(c, q)).collect())
        .collect();
    let point = columns.iter().map(|c| stats::quantile_sorted(c, 0.5)).collect();
    (quantiles, point)
}

/// NLL per dimension, in data units, of `test` continuing `train`.
pub fn evaluate_nll<B: Backend + ?Sized>(
    train: &TimeSeries,
    test: &TimeSeries,
    backend: &B,
    cfg: &ForecastConfig,
) -> Result<f64> {
    if test.observed_count() == 0 {
        return Err(Error::EmptyInput("test series has no observed values"));
    }
    let prompt = build_prompt(train, cfg, backend.chars_per_token())?;
    let scaled_test = scaler::transform(test, &prompt.scaler);
    let continuation = encode_continuation(&scaled_test, &cfg.encoding)?;
    let scored = backend.score(&prompt.text, &continuation, &cfg.sampling)?;
    let dist = DigitDistribution::from_top_k(&scored.tokens, &cfg.encoding)?;
    continuation_nll_per_dim(test, &dist, &prompt.scaler, &cfg.encoding)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneEntry {
    pub index: usize,
    pub nll_per_dim: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_index: usize,
    pub best: ForecastConfig,
    pub validation_len: usize,
    pub table: Vec<TuneEntry>,
}

/// Validation length: the requested length, else a fifth of the series,
/// falling back to the last half when the series is too short.
pub fn validation_len(len: usize, requested: Option<usize>) -> Result<usize> {
    if len < 2 {
        return Err(Error::InvalidSeries("tuning needs at least 2 observations".into()));
    }
    let t = requested.unwrap_or_else(|| ((len as f64 * 0.2).round() as usize).max(1));
    Ok(if t == 0 || len < 2 * t { len / 2 } else { t })
}

/// Picks the config with the lowest validation NLL on the last
/// observations of `train`. Ties keep the earlier config.
pub fn tune<B: Backend + ?Sized>(
    train: &TimeSeries,
    backend: &B,
    grid: &[ForecastConfig],
    validation: Option<usize>,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty tuning grid".into()));
    }
    let t = validation_len(train.len(), validation)?;
    let split = train.len() - t;
    let (fit, val) = (train.slice(0..split), train.slice(split..train.len()));
    let mut best: Option<(usize, f64)> = None;
    let mut table = Vec::with_capacity(grid.len());
    for (index, cfg) in grid.iter().enumerate() {
        match evaluate_nll(&fit, &val, backend, cfg) {
            Ok(nll) if nll.is_finite() => {
                if best.is_none_or(|(_, b)| nll < b) {
                    best = Some((index, nll));
                }
                table.push(TuneEntry {
                    index,
                    nll_per_dim: Some(nll),
                    error: None,
                });
            }
            Ok(nll) => table.push(TuneEntry {
                index,
                nll_per_dim: None,
                error: Some(format!("non-finite NLL {nll}")),
            }),
            Err(e) => table.push(TuneEntry {
                index,
                nll_per_dim: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let (best_index, _) = best.ok_or(Error::AllConfigsFailed(grid.len()))?;
    Ok(TuneResult {
        best_index,
        best: grid[best_index].clone(),
        validation_len: t,
        table,
    })
}

pub const DEFAULT_ALPHAS: [f64; 4] = [0.5, 0.7, 0.9, 0.99];
pub const DEFAULT_BETAS: [f64; 4] = [0.0, 0.15, 0.3, 0.5];
pub const DEFAULT_PRECISIONS: [usize; 2] = [2, 3];

/// The 32-config search grid over alpha × beta × precision, at
/// temperature 0.7, built on top of `base`.
pub fn default_grid(base: &ForecastConfig) -> Vec<ForecastConfig> {
    let mut grid = Vec::with_capacity(32);
    for alpha in DEFAULT_ALPHAS {
        for beta in DEFAULT_BETAS {
            for precision in DEFAULT_PRECISIONS {
                let mut cfg = base.clone();
                cfg.scaler = ScalerConfig::new(alpha, beta);
                cfg.encoding.precision = precision;
                cfg.sampling.temperature = 0.7;
                grid.push(cfg);
            }
        }
    }
    grid
}
