use digitcast_core::forecaster::ForecastConfig;
use digitcast_core::scaler::ScalerParams;
use serde::{Deserialize, Serialize};

use crate::output::FileDigest;

pub const MANIFEST_VERSION: u32 = 1;

/// Everything needed to reproduce a forecast or tuning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub command: String,
    pub backend_id: String,
    pub config: ForecastConfig,
    /// The tuning grid, for tune runs.
    pub grid: Option<Vec<ForecastConfig>>,
    pub seed: u64,
    pub series: Vec<SeriesRecord>,
    /// Keys of the fixtures read or written by the backend.
    pub fixture_keys: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Wall-clock time, the one field that differs between identical runs.
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub name: String,
    pub scaler: Option<ScalerParams>,
    pub history_start: Option<usize>,
    pub valid_sample_count: Option<usize>,
    pub sampling_rounds: Option<usize>,
    pub max_new_tokens: Option<usize>,
}

impl SeriesRecord {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            scaler: None,
            history_start: None,
            valid_sample_count: None,
            sampling_rounds: None,
            max_new_tokens: None,
        }
    }
}
