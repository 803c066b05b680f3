use std::fmt::Write as _;
use std::time::Instant;

use digitcast_core::forecaster::{tune, ForecastConfig, TuneResult};
use digitcast_core::series::read_csv;
use serde::{Deserialize, Serialize};

use crate::args::TuneArgs;
use crate::backend;
use crate::config::{load_grid, load_run_config};
use crate::error::Result;
use crate::manifest::{RunManifest, SeriesRecord, MANIFEST_VERSION};
use crate::output::RunDir;

/// Contents of `tune.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneFile {
    pub series: Vec<SeriesTune>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTune {
    pub name: String,
    #[serde(flatten)]
    pub result: TuneResult,
}

/// One row per (series, config): the config's axes and its validation NLL.
fn nll_table(series: &[SeriesTune], grid: &[ForecastConfig]) -> String {
    let mut out = String::from("series,index,alpha,beta,basic,precision,temperature,nll_per_dim,error\n");
    for s in series {
        for entry in &s.result.table {
            let cfg = &grid[entry.index];
            let nll = entry.nll_per_dim.map_or(String::new(), |v| v.to_string());
            let error = entry.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            writeln!(
                out,
                "{},{},{},{},{},{},{},{nll},{error}",
                s.name,
                entry.index,
                cfg.scaler.alpha,
                cfg.scaler.beta,
                cfg.scaler.basic,
                cfg.encoding.precision,
                cfg.sampling.temperature,
            )
            .expect("writing to a string");
        }
    }
    out
}

pub fn run(args: &TuneArgs) -> Result<()> {
    let started = Instant::now();
    let run_cfg = load_run_config(args.config.as_deref())?;
    let grid = load_grid(args.grid.as_deref())?.expand(&run_cfg.forecast);
    let table = read_csv(&args.input)?;
    let backend = backend::build(&args.backend, &run_cfg)?;

    let mut dir = RunDir::create(&args.out)?;
    dir.snapshot(&args.input, "input.csv")?;
    if let Some(path) = &args.grid {
        dir.snapshot(path, "grid.toml")?;
    }

    let mut results = Vec::new();
    for (name, series) in &table.columns {
        let result = tune(series, backend.as_ref(), &grid, args.validation)?;
        results.push(SeriesTune {
            name: name.clone(),
            result,
        });
    }

    dir.write("nll_table.csv", &nll_table(&results, &grid))?;
    for s in &results {
        let file = if results.len() == 1 {
            "best_config.toml".to_string()
        } else {
            format!("best_config_{}.toml", s.name)
        };
        let text = toml::to_string(&s.result.best).expect("configs serialize to TOML");
        dir.write(&file, &text)?;
    }
    let file = TuneFile { series: results };
    dir.write_json("tune.json", &file)?;

    let manifest = RunManifest {
        manifest_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: "tune".into(),
        backend_id: backend.id(),
        seed: run_cfg.forecast.sampling.seed,
        config: run_cfg.forecast,
        grid: Some(grid),
        series: file.series.iter().map(|s| SeriesRecord::named(&s.name)).collect(),
        fixture_keys: backend.fixture_keys(),
        inputs: dir.inputs.clone(),
        outputs: dir.outputs.clone(),
        elapsed_ms: started.elapsed().as_millis() as u64,
    };
    dir.write_json("manifest.json", &manifest)?;
    Ok(())
}
