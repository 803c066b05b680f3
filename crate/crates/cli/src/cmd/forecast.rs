use std::time::Instant;

use digitcast_core::backend::Backend;
use digitcast_core::forecaster::{evaluate_nll, forecast, ForecastConfig};
use digitcast_core::metrics::{aggregate, Aggregate, MetricReport};
use digitcast_core::series::{read_csv, Table, TimeSeries};
use digitcast_core::Error;
use serde::{Deserialize, Serialize};

use crate::args::ForecastArgs;
use crate::backend;
use crate::config::load_run_config;
use crate::error::{CliError, Result};
use crate::manifest::{RunManifest, SeriesRecord, MANIFEST_VERSION};
use crate::output::{quantile_label, step_csv, RunDir};

pub const METRICS_VERSION: u32 = 1;

/// Contents of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub metrics_version: u32,
    pub series: Vec<SeriesMetrics>,
    pub aggregate: AggregateMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetrics {
    pub name: String,
    #[serde(flatten)]
    pub report: MetricReport,
}

/// Means over series with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub mae: Aggregate,
    pub crps: Aggregate,
    pub nll_per_dim: Option<Aggregate>,
}

/// Picks the truth column for `name`: same name, or the only column when
/// both files hold a single series.
fn truth_for<'a>(truth: &'a Table, name: &str, single: bool) -> Result<&'a TimeSeries> {
    if let Some((_, ts)) = truth.columns.iter().find(|(n, _)| n == name) {
        return Ok(ts);
    }
    if single && truth.columns.len() == 1 {
        return Ok(&truth.columns[0].1);
    }
    Err(Error::InvalidSeries(format!("truth file has no column {name:?}")).into())
}

/// NLL of the truth under the backend, or `None` when it cannot score.
fn score_truth(
    history: &TimeSeries,
    truth: &TimeSeries,
    backend: &dyn Backend,
    cfg: &ForecastConfig,
) -> Result<Option<f64>> {
    match evaluate_nll(history, truth, backend, cfg) {
        Ok(nll) => Ok(Some(nll)),
        Err(Error::Unsupported { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: &ForecastArgs) -> Result<()> {
    let started = Instant::now();
    if args.horizon == 0 {
        return Err(CliError::Usage("--horizon must be at least 1".into()));
    }
    let mut run_cfg = load_run_config(args.config.as_deref())?;
    let cfg = &mut run_cfg.forecast;
    cfg.horizon = args.horizon;
    if let Some(seed) = args.seed {
        cfg.sampling.seed = seed;
    }
    if let Some(n) = args.samples {
        cfg.sampling.n_samples = n;
    }
    cfg.validate()?;
    let cfg = run_cfg.forecast.clone();

    let table = read_csv(&args.input)?;
    let truth = args.truth.as_deref().map(read_csv).transpose()?;
    let backend = backend::build(&args.backend, &run_cfg)?;

    let mut dir = RunDir::create(&args.out)?;
    dir.snapshot(&args.input, "input.csv")?;
    if let Some(path) = &args.truth {
        dir.snapshot(path, "truth.csv")?;
    }

    let single = table.columns.len() == 1;
    let mut samples_cols = Vec::new();
    let mut quantile_cols = Vec::new();
    let mut point_cols = Vec::new();
    let mut records = Vec::new();
    let mut metrics = Vec::new();
    for (name, history) in &table.columns {
        let f = forecast(history, backend.as_ref(), &cfg)?;
        for (i, s) in f.samples.iter().enumerate() {
            samples_cols.push((format!("{name}_s{i}"), s.clone()));
        }
        for (level, row) in f.quantile_levels.iter().zip(&f.quantiles) {
            quantile_cols.push((format!("{name}_{}", quantile_label(*level)), row.clone()));
        }
        point_cols.push((name.clone(), f.point.clone()));
        if let Some(truth) = &truth {
            let full = truth_for(truth, name, single)?;
            if full.len() < cfg.horizon {
                return Err(Error::LengthMismatch {
                    expected: cfg.horizon,
                    actual: full.len(),
                }
                .into());
            }
            let target = full.slice(0..cfg.horizon);
            let nll = score_truth(history, &target, backend.as_ref(), &cfg)?;
            let report = MetricReport::compute(&f.samples, &f.point, &target, history, nll)?;
            metrics.push(SeriesMetrics {
                name: name.clone(),
                report,
            });
        }
        records.push(SeriesRecord {
            scaler: Some(f.scaler),
            history_start: Some(f.history_start),
            valid_sample_count: Some(f.valid_sample_count),
            sampling_rounds: Some(f.sampling_rounds),
            max_new_tokens: Some(f.max_new_tokens),
            ..SeriesRecord::named(name)
        });
    }

    dir.write("samples.csv", &step_csv(&samples_cols))?;
    dir.write("quantiles.csv", &step_csv(&quantile_cols))?;
    dir.write("point.csv", &step_csv(&point_cols))?;
    if truth.is_some() {
        let mae: Vec<f64> = metrics.iter().map(|m| m.report.mae).collect();
        let crps: Vec<f64> = metrics.iter().map(|m| m.report.crps_mean).collect();
        let nll: Option<Vec<f64>> = metrics.iter().map(|m| m.report.nll_per_dim).collect();
        let file = MetricsFile {
            metrics_version: METRICS_VERSION,
            aggregate: AggregateMetrics {
                mae: aggregate(&mae)?,
                crps: aggregate(&crps)?,
                nll_per_dim: nll.map(|v| aggregate(&v)).transpose()?,
            },
            series: metrics,
        };
        dir.write_json("metrics.json", &file)?;
    }
    let manifest = RunManifest {
        manifest_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "forecast".into(),
        backend_id: backend.id(),
        seed: cfg.sampling.seed,
        config: cfg,
        grid: None,
        series: records,
        fixture_keys: backend.fixture_keys(),
        inputs: dir.inputs.clone(),
        outputs: dir.outputs.clone(),
        elapsed_ms: started.elapsed().as_millis() as u64,
    };
    dir.write_json("manifest.json", &manifest)?;
    Ok(())
}
