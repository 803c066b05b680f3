//! Probabilistic time-series forecasting with digit-level language models.
//!
//! A numeric series is rescaled, serialized into a digit string, handed to an
//! autoregressive text model as a prompt, and the sampled continuations are
//! decoded back into numbers. Because every value is spelled digit by digit,
//! the model's per-token probabilities also define a continuous density over
//! the reals, which gives exact likelihoods for evaluation and tuning.
//!
//! The main pieces:
//!
//! - [`codec`]: series ↔ digit-string conversion.
//! - [`scaler`]: percentile-based affine rescaling.
//! - [`density`]: discrete token distributions → continuous log-densities.
//! - [`decimal_ar`]: a small character n-gram model over encoded numbers.
//! - [`backend`]: HTTP completion endpoints, the local n-gram model, and
//!   record/replay fixtures behind one trait.
//! - [`forecaster`]: the sampling pipeline and validation-likelihood tuning.
//! - [`metrics`]: MAE, CRPS, Wasserstein distance and friends.
//! - [`datagen`]: synthetic series and missing-data corruption.
//!
//! ```
//! use digitcast_core::codec::{encode_series, EncodingConfig};
//! use digitcast_core::series::TimeSeries;
//!
//! let cfg = EncodingConfig::spaced(2);
//! let ts = TimeSeries::from_values(vec![0.123, 1.23, 12.3, 123.0]);
//! assert_eq!(
//!     encode_series(&ts, &cfg).unwrap(),
//!     " 1 2 , 1 2 3 , 1 2 3 0 , 1 2 3 0 0 ,"
//! );
//! ```

pub mod backend;
pub mod codec;
pub mod datagen;
pub mod decimal_ar;
pub mod density;
pub mod forecaster;
pub mod metrics;
pub mod scaler;
pub mod series;
pub mod stats;
pub mod testing;

mod error;

pub use error::{Error, Result};
