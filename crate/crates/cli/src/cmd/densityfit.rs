use digitcast_core::codec::EncodingConfig;
use digitcast_core::decimal_ar::{DecimalArDensity, FlatHistogram};
use digitcast_core::metrics::wasserstein1;
use digitcast_core::series::{read_csv, write_csv, TimeSeries};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::args::DensityFitArgs;
use crate::error::{CliError, Result};
use crate::output::RunDir;

pub const MIN_SAMPLES: usize = 20;
pub const HISTOGRAM_BINS: usize = 10;
/// Bin enumeration drops digit prefixes below this probability.
const PRUNE_BELOW: f64 = 1e-9;
const PROBES: usize = HISTOGRAM_BINS;

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n_samples: usize,
    pub n_train: usize,
    pub n_heldout: usize,
    pub draws: usize,
    pub order: usize,
    pub precision: usize,
    pub smoothing: f64,
    pub max_digits: usize,
    pub seed: u64,
    /// W1 between model draws and the held-out samples.
    pub w1_model: f64,
    /// W1 between histogram draws and the held-out samples.
    pub w1_histogram: f64,
    /// Total mass of the enumerated bins.
    pub density_integral: f64,
    pub pruned_mass: f64,
    pub probes: Vec<DensityProbe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProbe {
    /// Centre of the probe window.
    pub x: f64,
    /// Mean densities over the window.
    pub model: f64,
    pub histogram: f64,
}

pub fn run(args: &DensityFitArgs) -> Result<()> {
    if !(args.holdout > 0.0 && args.holdout < 1.0) {
        return Err(CliError::Usage("--holdout must be in (0, 1)".into()));
    }
    if args.draws == 0 {
        return Err(CliError::Usage("--draws must be at least 1".into()));
    }
    let table = read_csv(&args.samples)?;
    let mut values: Vec<f64> = table
        .columns
        .first()
        .map(|(_, ts)| ts.observed())
        .unwrap_or_default();
    if values.len() < MIN_SAMPLES {
        return Err(CliError::TooFewSamples {
            found: values.len(),
            required: MIN_SAMPLES,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    values.shuffle(&mut rng);
    let n = values.len();
    let n_heldout = ((n as f64 * args.holdout).round() as usize).clamp(1, n - 1);
    let (heldout, train) = values.split_at(n_heldout);

    let density = DecimalArDensity::fit(train, EncodingConfig::spaced(args.precision), args.order, args.smoothing)?;
    let histogram = FlatHistogram::fit(train, HISTOGRAM_BINS)?;
    let model_draws = density.sample_values(args.draws, &mut rng)?;
    let histogram_draws = histogram.sample_values(args.draws, &mut rng);
    let bins = density.bins(PRUNE_BELOW)?;

    let low = train.iter().copied().fold(f64::INFINITY, f64::min);
    let high = train.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // One probe per histogram bin: the model's mean density over the bin
    // next to the histogram's.
    let width = (high - low) / PROBES as f64;
    let probes = (0..PROBES)
        .map(|k| {
            let start = low + width * k as f64;
            let x = start + width / 2.0;
            let model = if width > 0.0 {
                bins.mass_between(start, start + width) / width
            } else {
                bins.density(x)
            };
            DensityProbe {
                x,
                model,
                histogram: histogram.density(x),
            }
        })
        .collect();
    let report = DensityReport {
        n_samples: n,
        n_train: train.len(),
        n_heldout,
        draws: args.draws,
        order: args.order,
        precision: args.precision,
        smoothing: args.smoothing,
        max_digits: density.encoding.max_digits,
        seed: args.seed,
        w1_model: wasserstein1(&model_draws, heldout)?,
        w1_histogram: wasserstein1(&histogram_draws, heldout)?,
        density_integral: bins.integral(),
        pruned_mass: bins.pruned_mass,
        probes,
    };

    let mut dir = RunDir::create(&args.out)?;
    dir.snapshot(&args.samples, "input.csv")?;
    dir.write("model.dar", &density.model.to_text())?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &TimeSeries::from_values(model_draws))?;
    dir.write("model_samples.csv", &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    dir.write_json("report.json", &report)?;
    Ok(())
}
