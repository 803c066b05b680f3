//! Percentile-based affine rescaling applied before encoding.
//!
//! A series is mapped through `z ↦ (z - offset_b) / scale_a`. The default
//! variant shifts by `min - beta * (max - min)` and scales so that the
//! `alpha`-percentile of the shifted series becomes 1; the basic variant
//! only scales, by the `alpha`-percentile of absolute values. Leaving the
//! top `1 - alpha` of values above 1 lets the model see digit-count changes.

use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;
use crate::stats;
use crate::{Error, Result};

/// Smallest allowed scale, so tiny or constant series never divide by ~0.
pub const EPSILON_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerConfig {
    pub alpha: f64,
    pub beta: f64,
    pub basic: bool,
}

impl Default for ScalerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.95,
            beta: 0.3,
            basic: false,
        }
    }
}

impl ScalerConfig {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            basic: false,
        }
    }

    pub fn basic(alpha: f64) -> Self {
        Self {
            alpha,
            beta: 0.0,
            basic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// A fitted affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub offset_b: f64,
    pub scale_a: f64,
    pub config: ScalerConfig,
}

impl ScalerParams {
    /// The identity transform.
    pub fn identity() -> Self {
        Self {
            offset_b: 0.0,
            scale_a: 1.0,
            config: ScalerConfig::basic(1.0),
        }
    }

    pub fn apply(&self, z: f64) -> f64 {
        (z - self.offset_b) / self.scale_a
    }

    pub fn invert(&self, x: f64) -> f64 {
        x * self.scale_a + self.offset_b
    }

    /// `log |dx/dz|` of the forward map, added to log-densities measured in
    /// rescaled space to express them in data space.
    pub fn log_jacobian(&self) -> f64 {
        -self.scale_a.ln()
    }
}

/// Fits scaler parameters on the observed values of `ts`.
pub fn fit(ts: &TimeSeries, cfg: &ScalerConfig) -> Result<ScalerParams> {
    cfg.validate()?;
    let observed = ts.observed();
    if observed.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (offset_b, base) = if cfg.basic {
        (0.0, observed.iter().map(|v| v.abs()).collect::<Vec<_>>())
    } else {
        let min = observed.iter().copied().fold(f64::INFINITY, f64::min);
        let max = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let b = min - cfg.beta * (max - min);
        (b, observed.iter().map(|v| v - b).collect())
    };
    let scale_a = stats::quantile(&base, cfg.alpha).max(EPSILON_SCALE);
    Ok(ScalerParams {
        offset_b,
        scale_a,
        config: *cfg,
    })
}

pub fn transform(ts: &TimeSeries, p: &ScalerParams) -> TimeSeries {
    ts.map_observed(|z| p.apply(z))
}

pub fn inverse_transform(ts: &TimeSeries, p: &ScalerParams) -> TimeSeries {
    ts.map_observed(|x| p.invert(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::from_values(v.to_vec())
    }

    #[test]
    fn fit_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let p = fit(&ts(&v), &ScalerConfig::new(0.9, 0.0)).unwrap();
        assert_eq!(p.offset_b, 1.0);
        assert!((p.scale_a - 89.1).abs() < 1e-12);

        let p = fit(&ts(&[5.0, 5.0, 5.0]), &ScalerConfig::new(0.99, 0.0)).unwrap();
        assert_eq!(p.offset_b, 5.0);
        assert_eq!(p.scale_a, EPSILON_SCALE);

        let p = fit(&ts(&[2.0, 4.0]), &ScalerConfig::basic(1.0)).unwrap();
        assert_eq!((p.offset_b, p.scale_a), (0.0, 4.0));
    }

    #[test]
    fn basic_scaler_floors_tiny_series() {
        let p = fit(&ts(&[1e-5, -2e-5]), &ScalerConfig::basic(0.9)).unwrap();
        assert_eq!(p.scale_a, EPSILON_SCALE);
    }

    #[test]
    fn beta_shifts_offset_below_min() {
        let p = fit(&ts(&[10.0, 20.0]), &ScalerConfig::new(1.0, 0.5)).unwrap();
        assert_eq!(p.offset_b, 5.0);
        assert_eq!(p.scale_a, 15.0);
    }

    #[test]
    fn fit_ignores_missing_and_rejects_all_missing() {
        let s = ts(&[1.0, f64::NAN, 3.0]);
        let p = fit(&s, &ScalerConfig::new(1.0, 0.0)).unwrap();
        assert_eq!((p.offset_b, p.scale_a), (1.0, 2.0));
        let out = transform(&s, &p);
        assert!(out.is_missing(1));
        assert!(matches!(
            fit(&ts(&[f64::NAN]), &ScalerConfig::default()),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn transform_example() {
        let p = ScalerParams {
            offset_b: 1.0,
            scale_a: 5.0,
            config: ScalerConfig::default(),
        };
        assert_eq!(transform(&ts(&[6.0]), &p).values(), &[1.0]);
    }

    #[test]
    fn invalid_configs() {
        assert!(ScalerConfig::new(0.0, 0.0).validate().is_err());
        assert!(ScalerConfig::new(1.1, 0.0).validate().is_err());
        assert!(ScalerConfig::new(0.5, -0.1).validate().is_err());
    }

    proptest! {
        #[test]
        fn inverse_undoes_transform(
            values in prop::collection::vec(-1e6f64..1e6, 1..50),
            alpha in 0.05f64..=1.0,
            beta in 0.0f64..1.0,
            basic in any::<bool>(),
        ) {
            let cfg = ScalerConfig { alpha, beta, basic };
            let s = ts(&values);
            let p = fit(&s, &cfg).unwrap();
            prop_assert!(p.scale_a >= EPSILON_SCALE);
            let back = inverse_transform(&transform(&s, &p), &p);
            for (a, b) in s.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(p.scale_a).max(p.offset_b.abs()));
            }
        }

        #[test]
        fn alpha_percentile_maps_to_one(
            values in prop::collection::vec(-1e3f64..1e3, 2..50),
            alpha in 0.05f64..=1.0,
        ) {
            let s = ts(&values);
            let p = fit(&s, &ScalerConfig::new(alpha, 0.0)).unwrap();
            prop_assume!(p.scale_a > EPSILON_SCALE);
            let q = stats::quantile(&transform(&s, &p).observed(), alpha);
            prop_assert!((q - 1.0).abs() < 1e-9);
        }

        #[test]
        fn transform_is_monotone(
            values in prop::collection::vec(-1e3f64..1e3, 2..30),
            alpha in 0.05f64..=1.0,
            beta in 0.0f64..1.0,
        ) {
            let s = ts(&values);
            let p = fit(&s, &ScalerConfig::new(alpha, beta)).unwrap();
            let t = transform(&s, &p);
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] < values[j] {
                        prop_assert!(t.values()[i] <= t.values()[j]);
                    }
                }
            }
        }
    }
}
