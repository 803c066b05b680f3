//! Continuous densities from discrete digit distributions.
//!
//! With `n` fractional digits in base `B`, a value's digit string picks one
//! bin of width `B^-n`; spreading the string's probability `p_k` uniformly
//! over that bin gives the log-density `log p_k + n log B` in rescaled
//! space. The scaler's Jacobian `-log scale_a` moves it to data space.
//!
//! Since the encoding rounds half away from zero, the bin of the value
//! `k * B^-n` is centred on it: `[(k - ½) B^-n, (k + ½) B^-n)`.
//!
//! Remote APIs only return the top few log-probabilities per position. The
//! probability mass of non-numeric tokens among them, `l0`, is removed by
//! renormalizing: `log p̃ = log p - log(1 - e^l0)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{encode_chunks, EncodingConfig};
use crate::scaler::ScalerParams;
use crate::series::TimeSeries;
use crate::stats::{log1mexp, logsumexp};
use crate::{Error, Result};

/// Token → natural-log probability.
pub type LogprobMap = BTreeMap<String, f64>;

/// One generated or scored token with the backend's top-k alternatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
    #[serde(default)]
    pub top: LogprobMap,
}

/// A categorical distribution at one position of a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Position {
    /// The token actually present at this position, when known.
    pub token: Option<String>,
    pub logprobs: LogprobMap,
}

/// Per-position distributions over the numeric alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitDistribution {
    pub positions: Vec<Position>,
    pub base: u32,
    pub precision: usize,
}

/// Renormalizes retained log-probabilities after removing excluded mass
/// `e^l0`. `l0 = -inf` leaves the map unchanged.
pub fn adjust_logprobs(raw: &LogprobMap, excluded_logmass: f64) -> Result<LogprobMap> {
    if excluded_logmass.is_nan() || excluded_logmass >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "excluded log-mass must be < 0, got {excluded_logmass}"
        )));
    }
    let shift = -log1mexp(excluded_logmass);
    Ok(raw.iter().map(|(k, v)| (k.clone(), v + shift)).collect())
}

impl DigitDistribution {
    /// Builds a distribution from maps already restricted to the numeric
    /// alphabet.
    pub fn new(positions: Vec<Position>, cfg: &EncodingConfig) -> Result<Self> {
        for (i, p) in positions.iter().enumerate() {
            let total = logsumexp(p.logprobs.values().copied());
            if total > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "position {i} has total probability {} > 1",
                    total.exp()
                )));
            }
        }
        Ok(Self {
            positions,
            base: cfg.base,
            precision: cfg.precision,
        })
    }

    /// Builds a distribution from complete next-token distributions: tokens
    /// outside the numeric alphabet are dropped and the rest renormalized
    /// exactly.
    pub fn from_full(
        positions: Vec<(Option<String>, LogprobMap)>,
        cfg: &EncodingConfig,
    ) -> Result<Self> {
        let alphabet = cfg.alphabet();
        let positions = positions
            .into_iter()
            .map(|(token, full)| {
                let kept: LogprobMap = full
                    .into_iter()
                    .filter(|(t, _)| alphabet.allows_token(t))
                    .collect();
                let norm = logsumexp(kept.values().copied());
                let logprobs = kept.into_iter().map(|(t, v)| (t, v - norm)).collect();
                Position { token, logprobs }
            })
            .collect();
        Self::new(positions, cfg)
    }

    /// Builds a distribution from truncated top-k API output.
    ///
    /// `l0` at each position is the total probability of the non-numeric
    /// tokens that appear in the top-k; when none appear it is `-inf`.
    pub fn from_top_k(tokens: &[TokenLogprob], cfg: &EncodingConfig) -> Result<Self> {
        let alphabet = cfg.alphabet();
        let mut positions = Vec::with_capacity(tokens.len());
        for t in tokens {
            let mut merged = t.top.clone();
            merged.entry(t.token.clone()).or_insert(t.logprob);
            let (kept, dropped): (LogprobMap, LogprobMap) =
                merged.into_iter().partition(|(k, _)| alphabet.allows_token(k));
            let l0 = logsumexp(dropped.values().copied());
            let logprobs = if l0 == f64::NEG_INFINITY {
                kept
            } else {
                adjust_logprobs(&kept, l0)?
            };
            positions.push(Position {
                token: Some(t.token.clone()),
                logprobs,
            });
        }
        Self::new(positions, cfg)
    }
}

/// A token matched against the target text.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredToken {
    /// Byte offset of the token in the target.
    pub offset: usize,
    pub token: String,
    pub logprob: f64,
}

/// Aligns `target` with the distribution's positions and returns the
/// log-probability of each matched token.
pub fn score_tokens(target: &str, dist: &DigitDistribution) -> Result<Vec<ScoredToken>> {
    let mut offset = 0;
    let mut out = Vec::new();
    for (i, pos) in dist.positions.iter().enumerate() {
        if offset >= target.len() {
            break;
        }
        let rest = &target[offset..];
        let token = match &pos.token {
            Some(t) if rest.starts_with(t.as_str()) && !t.is_empty() => t.clone(),
            Some(t) => {
                return Err(Error::Coverage(format!(
                    "position {i} holds {t:?} but the target continues with {:?}",
                    rest.chars().take(8).collect::<String>()
                )))
            }
            None => pos
                .logprobs
                .keys()
                .filter(|k| !k.is_empty() && rest.starts_with(k.as_str()))
                .max_by_key(|k| k.len())
                .cloned()
                .ok_or_else(|| {
                    Error::Coverage(format!(
                        "no token at position {i} matches {:?}",
                        rest.chars().take(8).collect::<String>()
                    ))
                })?,
        };
        let logprob = *pos.logprobs.get(&token).ok_or_else(|| {
            Error::Coverage(format!("token {token:?} missing from position {i}"))
        })?;
        out.push(ScoredToken {
            offset,
            token: token.clone(),
            logprob,
        });
        offset += token.len();
    }
    if offset < target.len() {
        return Err(Error::Coverage(format!(
            "distribution covers {offset} of {} bytes",
            target.len()
        )));
    }
    Ok(out)
}

/// Log-probability of `target` under the autoregressive factorization.
pub fn sequence_log_likelihood(target: &str, dist: &DigitDistribution) -> Result<f64> {
    Ok(score_tokens(target, dist)?.iter().map(|t| t.logprob).sum())
}

/// Likelihood of one value that landed in a single bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinLikelihood {
    pub log_pk: f64,
    pub n: usize,
    pub base: u32,
    pub jacobian_logdet: f64,
}

impl BinLikelihood {
    pub fn log_density(&self) -> f64 {
        self.log_pk + self.n as f64 * f64::from(self.base).ln() + self.jacobian_logdet
    }
}

/// Per-step likelihood breakdown of a scored series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesLikelihood {
    /// One entry per observed step, in order.
    pub bins: Vec<BinLikelihood>,
    /// Log-probability spent on missing-value tokens.
    pub missing_logprob: f64,
}

impl SeriesLikelihood {
    /// Average negative log-density per observed step.
    pub fn nll_per_dim(&self) -> Result<f64> {
        if self.bins.is_empty() {
            return Err(Error::EmptySeries);
        }
        let total: f64 = self.bins.iter().map(BinLikelihood::log_density).sum();
        Ok(-(total + self.missing_logprob) / self.bins.len() as f64)
    }
}

fn series_likelihood(
    series: &TimeSeries,
    dist: &DigitDistribution,
    scaler: &ScalerParams,
    cfg: &EncodingConfig,
    leading: &str,
) -> Result<SeriesLikelihood> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let scaled = crate::scaler::transform(series, scaler);
    let chunks = encode_chunks(&scaled, cfg)?;
    // Byte span of each step: its chunk plus the separator that ends it.
    let mut text = String::from(leading);
    let mut ends = Vec::with_capacity(chunks.len());
    for (i, c) in chunks.iter().enumerate() {
        text.push_str(c);
        text.push_str(if i + 1 == chunks.len() {
            cfg.terminator()
        } else {
            &cfg.time_sep
        });
        ends.push(text.len());
    }
    let mut step_lp = vec![0.0; chunks.len()];
    for tok in score_tokens(&text, dist)? {
        let step = ends.partition_point(|&e| e <= tok.offset);
        step_lp[step.min(chunks.len() - 1)] += tok.logprob;
    }
    let jacobian_logdet = scaler.log_jacobian();
    let mut bins = Vec::new();
    let mut missing_logprob = 0.0;
    for (i, lp) in step_lp.into_iter().enumerate() {
        if series.is_missing(i) {
            missing_logprob += lp;
        } else {
            bins.push(BinLikelihood {
                log_pk: lp,
                n: cfg.precision,
                base: cfg.base,
                jacobian_logdet,
            });
        }
    }
    Ok(SeriesLikelihood {
        bins,
        missing_logprob,
    })
}

/// NLL per dimension of `series` (data units) when `dist` scores its
/// standalone encoding.
pub fn continuous_nll_per_dim(
    series: &TimeSeries,
    dist: &DigitDistribution,
    scaler: &ScalerParams,
    cfg: &EncodingConfig,
) -> Result<f64> {
    series_likelihood(series, dist, scaler, cfg, "")?.nll_per_dim()
}

/// NLL per dimension of `series` when `dist` scores it as the continuation
/// of an encoded prompt (see [`crate::codec::encode_continuation`]).
pub fn continuation_nll_per_dim(
    series: &TimeSeries,
    dist: &DigitDistribution,
    scaler: &ScalerParams,
    cfg: &EncodingConfig,
) -> Result<f64> {
    let leading = &cfg.time_sep[cfg.terminator().len()..];
    series_likelihood(series, dist, scaler, cfg, leading)?.nll_per_dim()
}

/// A model exposing exact next-character distributions.
pub trait CharModel {
    /// Natural-log probability of `next` following `context`.
    fn char_logprob(&self, context: &str, next: char) -> f64;

    /// Log-probabilities of each of `candidates` following `context`.
    /// Models that compute a whole distribution at once should override it.
    fn next_logprobs(&self, context: &str, candidates: &[char]) -> Vec<f64> {
        candidates
            .iter()
            .map(|&c| self.char_logprob(context, c))
            .collect()
    }
}

/// One move while spelling out a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueStep {
    Sign,
    Digit(char),
    End,
}

/// A value string under construction: its sign and digits so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialValue {
    pub negative: bool,
    pub digits: String,
}

impl PartialValue {
    /// Whether the value may end here: some digits, no leading zero and
    /// no negative zero.
    pub fn is_complete(&self) -> bool {
        match self.digits.as_str() {
            "" => false,
            "0" => !self.negative,
            d => !d.starts_with('0'),
        }
    }

    /// Steps that keep the string a prefix of a canonical encoding.
    pub fn valid_steps(&self, cfg: &EncodingConfig) -> Vec<ValueStep> {
        let mut steps = Vec::with_capacity(12);
        if self.is_complete() {
            steps.push(ValueStep::End);
        }
        let leading_zero = self.digits == "0";
        if !leading_zero && self.digits.len() < cfg.max_digits {
            let first = if self.negative && self.digits.is_empty() { '1' } else { '0' };
            steps.extend((first..='9').map(ValueStep::Digit));
        }
        if cfg.signed && !self.negative && self.digits.is_empty() {
            steps.push(ValueStep::Sign);
        }
        steps
    }

    /// The text a step appends.
    pub fn step_text(&self, step: ValueStep, cfg: &EncodingConfig) -> String {
        match step {
            ValueStep::Sign => "-".into(),
            ValueStep::Digit(d) if self.negative || !self.digits.is_empty() => {
                format!("{}{d}", cfg.digit_sep)
            }
            ValueStep::Digit(d) => d.to_string(),
            ValueStep::End => cfg.terminator().to_string(),
        }
    }

    pub fn apply(&mut self, step: ValueStep) {
        match step {
            ValueStep::Sign => self.negative = true,
            ValueStep::Digit(d) => self.digits.push(d),
            ValueStep::End => {}
        }
    }

    /// The value in rescaled units (the centre of its bin).
    pub fn value(&self, cfg: &EncodingConfig) -> f64 {
        let int: u64 = self.digits.parse().unwrap_or(0);
        let magnitude = int as f64 * cfg.bin_width();
        if self.negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// Text that precedes the first character of a value after `prompt` (the
/// rest of the time separator, then the digit separator).
pub fn value_lead(prompt: &str, cfg: &EncodingConfig) -> String {
    if prompt.is_empty() {
        cfg.digit_sep.clone()
    } else {
        format!("{}{}", &cfg.time_sep[cfg.terminator().len()..], cfg.digit_sep)
    }
}

/// The valid next steps after `context` (which ends with the text of
/// `partial`), with log-probabilities renormalized over the valid set.
///
/// Conditioning each choice on validity makes the model a proper
/// distribution over canonical value strings: mass the raw model puts on
/// malformed continuations is shared out among the well-formed ones.
pub fn constrained_steps<M: CharModel + ?Sized>(
    model: &M,
    context: &str,
    partial: &PartialValue,
    cfg: &EncodingConfig,
) -> Vec<(ValueStep, f64)> {
    let steps = partial.valid_steps(cfg);
    let mut scored: Vec<(ValueStep, f64)> = Vec::with_capacity(steps.len());
    let digits: Vec<char> = steps
        .iter()
        .filter_map(|s| match s {
            ValueStep::Digit(d) => Some(*d),
            _ => None,
        })
        .collect();
    if !digits.is_empty() {
        // Every digit shares the same separator prefix.
        let prefix = partial.step_text(ValueStep::Digit('0'), cfg);
        let prefix = &prefix[..prefix.len() - 1];
        let mut ctx = context.to_string();
        let lead = emit(model, &mut ctx, prefix);
        let lps = model.next_logprobs(&ctx, &digits);
        scored.extend(digits.iter().zip(lps).map(|(&d, lp)| (ValueStep::Digit(d), lead + lp)));
    }
    for &step in &steps {
        if !matches!(step, ValueStep::Digit(_)) {
            let mut ctx = context.to_string();
            scored.push((step, emit(model, &mut ctx, &partial.step_text(step, cfg))));
        }
    }
    let total = logsumexp(scored.iter().map(|(_, lp)| *lp));
    for (_, lp) in &mut scored {
        *lp -= total;
    }
    scored
}

/// The discrete distribution over the next value implied by a character
/// model, as a table of bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinTable {
    /// `(bin centre in rescaled units, probability)` for every enumerated
    /// canonical value string.
    pub bins: Vec<(f64, f64)>,
    pub bin_width: f64,
    /// Probability of branches abandoned below the pruning threshold.
    pub pruned_mass: f64,
}

impl BinTable {
    /// Integral of the piecewise-uniform density, i.e. the total bin mass.
    pub fn integral(&self) -> f64 {
        self.bins.iter().map(|(_, p)| p).sum()
    }

    /// Density at `x` in rescaled units.
    pub fn density(&self, x: f64) -> f64 {
        let half = self.bin_width / 2.0;
        self.bins
            .iter()
            .find(|(c, _)| x >= c - half && x < c + half)
            .map_or(0.0, |(_, p)| p / self.bin_width)
    }

    /// Probability the density assigns to `[low, high)`.
    pub fn mass_between(&self, low: f64, high: f64) -> f64 {
        let half = self.bin_width / 2.0;
        self.bins
            .iter()
            .map(|&(c, p)| {
                let overlap = (high.min(c + half) - low.max(c - half)).max(0.0);
                p * overlap / self.bin_width
            })
            .sum()
    }
}

/// Enumerates every canonical encoding of the next value after `prompt`
/// (a prompt ending in the terminator, or empty) with its probability under
/// [`constrained_steps`].
///
/// Prefixes whose probability falls below `prune_below` are dropped and
/// their mass reported in [`BinTable::pruned_mass`], so the bins and the
/// pruned mass always sum to one.
pub fn enumerate_bins<M: CharModel + ?Sized>(
    model: &M,
    prompt: &str,
    cfg: &EncodingConfig,
    prune_below: f64,
) -> Result<BinTable> {
    cfg.validate()?;
    let mut table = BinTable {
        bins: Vec::new(),
        bin_width: cfg.bin_width(),
        pruned_mass: 0.0,
    };
    let mut walker = Walker {
        model,
        cfg,
        prune_below,
        table: &mut table,
    };
    let ctx = format!("{prompt}{}", value_lead(prompt, cfg));
    walker.visit(&ctx, 0.0, &PartialValue::default());
    Ok(table)
}

fn emit<M: CharModel + ?Sized>(model: &M, ctx: &mut String, s: &str) -> f64 {
    let mut lp = 0.0;
    for c in s.chars() {
        lp += model.char_logprob(ctx, c);
        ctx.push(c);
    }
    lp
}

struct Walker<'a, M: ?Sized> {
    model: &'a M,
    cfg: &'a EncodingConfig,
    prune_below: f64,
    table: &'a mut BinTable,
}

impl<M: CharModel + ?Sized> Walker<'_, M> {
    fn visit(&mut self, ctx: &str, lp: f64, partial: &PartialValue) {
        for (step, step_lp) in constrained_steps(self.model, ctx, partial, self.cfg) {
            let total = lp + step_lp;
            if step == ValueStep::End {
                self.table.bins.push((partial.value(self.cfg), total.exp()));
                continue;
            }
            if total.exp() < self.prune_below {
                self.table.pruned_mass += total.exp();
                continue;
            }
            let next_ctx = format!("{ctx}{}", partial.step_text(step, self.cfg));
            let mut next = partial.clone();
            next.apply(step);
            self.visit(&next_ctx, total, &next);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&str, f64)]) -> LogprobMap {
        entries.iter().map(|(k, p)| (k.to_string(), p.ln())).collect()
    }

    #[test]
    fn adjust_examples() {
        let raw = map(&[("1", 0.5)]);
        assert_eq!(adjust_logprobs(&raw, f64::NEG_INFINITY).unwrap(), raw);
        let adj = adjust_logprobs(&raw, 0.5f64.ln()).unwrap();
        assert!(adj["1"].abs() < 1e-15);
        let adj = adjust_logprobs(&map(&[("1", 0.2)]), 0.5f64.ln()).unwrap();
        assert!((adj["1"] - 0.4f64.ln()).abs() < 1e-15);
        assert!(adjust_logprobs(&raw, 0.0).is_err());
        assert!(adjust_logprobs(&raw, f64::NAN).is_err());
    }

    #[test]
    fn top_k_renormalizes_over_numeric_tokens() {
        let cfg = EncodingConfig::spaced(2);
        let tok = TokenLogprob {
            token: " 1".into(),
            logprob: 0.3f64.ln(),
            top: map(&[(" 1", 0.3), (" 2", 0.2), (" the", 0.25), ("\n", 0.05)]),
        };
        let d = DigitDistribution::from_top_k(&[tok], &cfg).unwrap();
        let p = &d.positions[0].logprobs;
        assert_eq!(p.len(), 2);
        let total: f64 = p.values().map(|v| v.exp()).sum();
        // 0.5 retained out of 0.7 remaining after removing 0.3.
        assert!((total - 0.5 / 0.7).abs() < 1e-12);
        assert!((p[" 1"] - (0.3f64 / 0.7).ln()).abs() < 1e-12);
    }

    #[test]
    fn sequence_examples() {
        let cfg = EncodingConfig::unspaced(0);
        let uniform: LogprobMap = ('0'..='9').map(|c| (c.to_string(), 0.1f64.ln())).collect();
        let pos = |m: &LogprobMap| Position {
            token: None,
            logprobs: m.clone(),
        };
        let d = DigitDistribution::new(vec![pos(&uniform); 3], &cfg).unwrap();
        let ll = sequence_log_likelihood("123", &d).unwrap();
        assert!((ll - 3.0 * 0.1f64.ln()).abs() < 1e-12);

        let d = DigitDistribution::new(vec![pos(&map(&[("7", 1.0)]))], &cfg).unwrap();
        assert_eq!(sequence_log_likelihood("7", &d).unwrap(), 0.0);
        assert!(matches!(
            sequence_log_likelihood("8", &d),
            Err(Error::Coverage(_))
        ));
        assert!(matches!(
            sequence_log_likelihood("77", &d),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn longest_prefix_match_for_multichar_tokens() {
        let cfg = EncodingConfig::spaced(0);
        let d = DigitDistribution::new(
            vec![
                Position {
                    token: None,
                    logprobs: map(&[(" 1", 0.5), (" 1 2", 0.25)]),
                },
                Position {
                    token: None,
                    logprobs: map(&[(" ,", 0.5)]),
                },
            ],
            &cfg,
        )
        .unwrap();
        let ll = sequence_log_likelihood(" 1 2 ,", &d).unwrap();
        assert!((ll - (0.25f64 * 0.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_overfull_position() {
        let cfg = EncodingConfig::unspaced(0);
        let bad = Position {
            token: None,
            logprobs: map(&[("1", 0.7), ("2", 0.7)]),
        };
        assert!(DigitDistribution::new(vec![bad], &cfg).is_err());
    }

    #[test]
    fn bin_log_density() {
        let b = BinLikelihood {
            log_pk: 0.0,
            n: 2,
            base: 10,
            jacobian_logdet: 0.0,
        };
        assert!((b.log_density() - 2.0 * 10f64.ln()).abs() < 1e-12);
    }

    /// Every character of the alphabet equally likely.
    struct Flat(Vec<char>);

    impl CharModel for Flat {
        fn char_logprob(&self, _: &str, next: char) -> f64 {
            if self.0.contains(&next) {
                -(self.0.len() as f64).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
    }

    #[test]
    fn exhaustive_bins_cover_each_value_once() {
        let mut cfg = EncodingConfig::spaced(1);
        cfg.max_digits = 2;
        let model = Flat(cfg.alphabet().chars().collect());
        let t = enumerate_bins(&model, "", &cfg, 0.0).unwrap();
        assert_eq!(t.pruned_mass, 0.0);
        assert!((t.integral() - 1.0).abs() < 1e-12);
        let mut tenths: Vec<i64> = t.bins.iter().map(|(c, _)| (c * 10.0).round() as i64).collect();
        tenths.sort_unstable();
        tenths.dedup();
        assert_eq!(tenths, (-99..=99).collect::<Vec<_>>());
    }

    #[test]
    fn mass_between_splits_bins_proportionally() {
        let t = BinTable {
            bins: vec![(0.0, 0.25), (1.0, 0.75)],
            bin_width: 1.0,
            pruned_mass: 0.0,
        };
        assert_eq!(t.mass_between(-10.0, 10.0), 1.0);
        assert_eq!(t.mass_between(0.0, 1.0), 0.125 + 0.375);
        assert_eq!(t.mass_between(0.75, 1.25), 0.375);
        assert_eq!(t.mass_between(2.0, 3.0), 0.0);
    }

    #[test]
    fn pruned_mass_accounts_for_the_rest() {
        let cfg = EncodingConfig::spaced(2);
        let model = Flat(cfg.alphabet().chars().collect());
        let t = enumerate_bins(&model, " 1 ,", &cfg, 1e-4).unwrap();
        assert!(t.pruned_mass > 0.0);
        assert!((t.integral() + t.pruned_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_texts_spell_the_encoding() {
        let cfg = EncodingConfig::spaced(0);
        let mut partial = PartialValue::default();
        let mut text = String::new();
        for step in [ValueStep::Sign, ValueStep::Digit('1'), ValueStep::Digit('2'), ValueStep::End] {
            assert!(partial.valid_steps(&cfg).contains(&step));
            text.push_str(&partial.step_text(step, &cfg));
            partial.apply(step);
        }
        assert_eq!(text, format!("{} ,", crate::codec::encode_value(-12.0, &cfg).unwrap()));
        assert_eq!(partial.value(&cfg), -12.0);
    }

    #[test]
    fn non_canonical_prefixes_have_no_continuations() {
        let cfg = EncodingConfig::spaced(0);
        let zero = PartialValue {
            negative: false,
            digits: "0".into(),
        };
        assert_eq!(zero.valid_steps(&cfg), vec![ValueStep::End]);
        let minus = PartialValue {
            negative: true,
            digits: String::new(),
        };
        let steps = minus.valid_steps(&cfg);
        assert!(!steps.contains(&ValueStep::Digit('0')) && !steps.contains(&ValueStep::End));
    }

    #[test]
    fn constrained_steps_normalize() {
        let cfg = EncodingConfig::unspaced(1);
        let model = Flat(cfg.alphabet().chars().collect());
        let partial = PartialValue {
            negative: false,
            digits: "4".into(),
        };
        let steps = constrained_steps(&model, "4", &partial, &cfg);
        let total: f64 = steps.iter().map(|(_, lp)| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(steps.len(), 11);
    }
}
