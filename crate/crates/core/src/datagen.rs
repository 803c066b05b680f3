//! Synthetic series and missing-data utilities.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticName {
    GaussianWave,
    Exp,
    LinearCos,
    Linear,
    Sine,
    Sinc,
    Beat,
    Sigmoid,
    Log,
    XTimesSine,
    Square,
    CompositeLinearPlusCosine,
}

impl SyntheticName {
    pub const ALL: [SyntheticName; 12] = [
        Self::GaussianWave,
        Self::Exp,
        Self::LinearCos,
        Self::Linear,
        Self::Sine,
        Self::Sinc,
        Self::Beat,
        Self::Sigmoid,
        Self::Log,
        Self::XTimesSine,
        Self::Square,
        Self::CompositeLinearPlusCosine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::GaussianWave => "gaussian_wave",
            Self::Exp => "exp",
            Self::LinearCos => "linear_cos",
            Self::Linear => "linear",
            Self::Sine => "sine",
            Self::Sinc => "sinc",
            Self::Beat => "beat",
            Self::Sigmoid => "sigmoid",
            Self::Log => "log",
            Self::XTimesSine => "x_times_sine",
            Self::Square => "square",
            Self::CompositeLinearPlusCosine => "composite_linear_plus_cosine",
        }
    }

    /// The generating function evaluated at `t`.
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Self::GaussianWave => (-5.0 * (t - 0.6).powi(2)).exp() * (20.0 * (t - 6.0)).sin(),
            Self::Exp => (2.0 * t).exp(),
            Self::LinearCos => 0.3 + 0.5 * t + 0.2 * (25.0 * t + 3.0).cos(),
            Self::Linear => 0.3 + 0.5 * t,
            Self::Sine => (40.0 * t + 3.0).sin(),
            Self::Sinc if t == 0.0 => 1.0,
            Self::Sinc => (10.0 * t).sin() / t / 10.0,
            Self::Beat => (3.0 * t).sin() * (25.0 * t).sin(),
            Self::Sigmoid => 1.0 / (1.0 + (-4.0 * t).exp()),
            Self::Log => (1.0 + t).ln(),
            Self::XTimesSine => 4.0 * (t + 1.0) * (10.0 * (t + 1.0) + 4.0).sin(),
            Self::Square => 3.0 * (t - 0.6).powi(2),
            Self::CompositeLinearPlusCosine => {
                let x = 5.0 * (t + 1.0);
                x + x.cos()
            }
        }
    }
}

impl fmt::Display for SyntheticName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: SyntheticName,
    pub n_points: usize,
    pub t_jitter_sd: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Default settings for `name`; the composite series is noisy by
    /// default, the others are not.
    pub fn new(name: SyntheticName) -> Self {
        Self {
            name,
            n_points: 200,
            t_jitter_sd: 0.1,
            noise_sd: if name == SyntheticName::CompositeLinearPlusCosine {
                0.05
            } else {
                0.0
            },
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidConfig("n_points must be >= 2".into()));
        }
        if !(self.t_jitter_sd >= 0.0 && self.t_jitter_sd.is_finite()) {
            return Err(Error::InvalidConfig("t_jitter_sd must be finite and >= 0".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig("noise_sd must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// `n` equispaced points over `[-1, 1]`.
pub fn linspace(n: usize) -> Vec<f64> {
    let step = 2.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { 1.0 } else { -1.0 + i as f64 * step })
        .collect()
}

/// Evaluates the named function on a shifted grid and adds noise.
/// Points where the function is undefined (e.g. `log` at `t <= -1`) are
/// missing.
pub fn generate(spec: &SyntheticSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shift = if spec.t_jitter_sd > 0.0 {
        Normal::new(0.0, spec.t_jitter_sd)
            .expect("valid sd")
            .sample(&mut rng)
    } else {
        0.0
    };
    let noise = (spec.noise_sd > 0.0).then(|| Normal::new(0.0, spec.noise_sd).expect("valid sd"));
    let values = linspace(spec.n_points)
        .into_iter()
        .map(|t| {
            let v = spec.name.eval(t + shift);
            match &noise {
                Some(d) => v + d.sample(&mut rng),
                None => v,
            }
        })
        .collect();
    Ok(TimeSeries::from_values(values))
}

/// Masks each interior point independently with probability `p`.
pub fn corrupt_missing(ts: &TimeSeries, p: f64, seed: u64) -> Result<TimeSeries> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("missing probability must be in [0, 1), got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ts.len();
    let mut missing = ts.missing().to_vec();
    for (i, m) in missing.iter_mut().enumerate() {
        let draw: f64 = rng.random();
        if i > 0 && i + 1 < n && draw < p {
            *m = true;
        }
    }
    let mut out = TimeSeries::with_mask(ts.values().to_vec(), missing)?;
    if let Some(stamps) = ts.timestamps() {
        out = out.with_timestamps(stamps.to_vec())?;
    }
    Ok(out)
}

/// Fills missing points by linear interpolation between the nearest
/// observed neighbours.
pub fn interpolate_linear(ts: &TimeSeries) -> Result<TimeSeries> {
    let n = ts.len();
    if n == 0 || ts.is_missing(0) || ts.is_missing(n - 1) {
        return Err(Error::InvalidSeries(
            "interpolation needs the first and last points present".into(),
        ));
    }
    let mut values = ts.values().to_vec();
    let mut left = 0;
    for i in 1..n {
        if ts.is_missing(i) {
            continue;
        }
        let gap = (i - left) as f64;
        for (k, v) in values.iter_mut().enumerate().take(i).skip(left + 1) {
            let w = (k - left) as f64 / gap;
            *v = ts.values()[left] * (1.0 - w) + ts.values()[i] * w;
        }
        left = i;
    }
    let mut out = TimeSeries::from_values(values);
    if let Some(stamps) = ts.timestamps() {
        out = out.with_timestamps(stamps.to_vec())?;
    }
    Ok(out)
}
