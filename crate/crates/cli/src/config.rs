//! Run configuration and tuning grid files (TOML).

use std::path::Path;

use digitcast_core::backend::HttpConfig;
use digitcast_core::decimal_ar::DecimalArConfig;
use digitcast_core::forecaster::ForecastConfig;
use digitcast_core::scaler::ScalerConfig;
use digitcast_core::Error;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::Result;

/// The built-in 32-config grid.
pub const DEFAULT_GRID: &str = include_str!("../grids/default.toml");

/// Everything a run file may set. Forecast fields sit at the top level;
/// backend settings live in `[http]` and `[decimal_ar]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub forecast: ForecastConfig,
    pub http: HttpConfig,
    pub decimal_ar: DecimalArSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecimalArSection {
    pub order: Option<usize>,
    pub smoothing: Option<f64>,
    pub seed: Option<u64>,
}

impl DecimalArSection {
    /// Model settings over the alphabet of `forecast`'s encoding.
    pub fn model_config(&self, forecast: &ForecastConfig) -> DecimalArConfig {
        let base = DecimalArConfig::for_encoding(&forecast.encoding);
        DecimalArConfig {
            order: self.order.unwrap_or(base.order),
            smoothing: self.smoothing.unwrap_or(base.smoothing),
            seed: self.seed.unwrap_or(base.seed),
            ..base
        }
    }
}

/// Axes of a tuning grid; the grid is their full product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub precision: Vec<usize>,
    /// Sampling temperatures; the base config's when absent.
    pub temperature: Option<Vec<f64>>,
    /// Use the offset-free scaler.
    #[serde(default)]
    pub basic: bool,
}

impl GridSpec {
    /// Expands the axes over `base`, alpha outermost.
    pub fn expand(&self, base: &ForecastConfig) -> Vec<ForecastConfig> {
        let temperatures = self
            .temperature
            .clone()
            .unwrap_or_else(|| vec![base.sampling.temperature]);
        let mut grid = Vec::new();
        for &alpha in &self.alpha {
            for &beta in &self.beta {
                for &precision in &self.precision {
                    for &temperature in &temperatures {
                        let mut cfg = base.clone();
                        cfg.scaler = if self.basic {
                            ScalerConfig::basic(alpha)
                        } else {
                            ScalerConfig::new(alpha, beta)
                        };
                        cfg.encoding.precision = precision;
                        cfg.sampling.temperature = temperature;
                        grid.push(cfg);
                    }
                }
            }
        }
        grid
    }
}

pub fn parse_toml<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        }
        .into()
    })
}

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_toml(&std::fs::read_to_string(path)?, path)
}

pub fn load_run_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => load_toml(p),
        None => Ok(RunConfig::default()),
    }
}

pub fn load_grid(path: Option<&Path>) -> Result<GridSpec> {
    match path {
        Some(p) => load_toml(p),
        None => parse_toml(DEFAULT_GRID, Path::new("<built-in grid>")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use digitcast_core::forecaster::default_grid;

    #[test]
    fn shipped_grid_matches_library_grid() {
        let base = ForecastConfig::default();
        let grid = load_grid(None).unwrap().expand(&base);
        assert_eq!(grid.len(), 32);
        assert_eq!(grid, default_grid(&base));
    }

    #[test]
    fn run_config_sections() {
        let text = r#"
            horizon = 4
            [encoding]
            precision = 2
            [sampling]
            n_samples = 7
            temperature = 1
            [http]
            model = "m"
            [decimal_ar]
            order = 9
        "#;
        let cfg: RunConfig = parse_toml(text, Path::new("x")).unwrap();
        assert_eq!(cfg.forecast.horizon, 4);
        assert_eq!(cfg.forecast.encoding.precision, 2);
        assert_eq!(cfg.forecast.sampling.n_samples, 7);
        assert_eq!(cfg.forecast.sampling.temperature, 1.0);
        assert_eq!(cfg.http.model, "m");
        assert_eq!(cfg.decimal_ar.model_config(&cfg.forecast).order, 9);
        assert_eq!(cfg.forecast.quantile_levels, vec![0.1, 0.5, 0.9]);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_toml::<RunConfig>(&text, Path::new("x")).unwrap(), cfg);
    }

    #[test]
    fn bad_grid_is_a_parse_error() {
        let err = parse_toml::<GridSpec>("alpha = [1]\nbogus = 2", Path::new("g")).unwrap_err();
        assert_eq!(err.category(), "parse");
    }

    #[test]
    fn single_config_grid() {
        let spec: GridSpec =
            parse_toml("alpha = [0.8]\nbeta = [0.1]\nprecision = [3]", Path::new("g")).unwrap();
        let grid = spec.expand(&ForecastConfig::default());
        assert_eq!(grid.len(), 1);
        assert_eq!(grid[0].scaler, ScalerConfig::new(0.8, 0.1));
    }
}
