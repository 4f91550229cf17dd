//! Sequential Bayesian boosting for nonstationary count series.
//!
//! A Gamma-Poisson model forecasts the demand rate; a Normal-Gamma model
//! of its log1p-scale residuals supplies an additive correction. The crate
//! also carries the reference forecasters, accuracy metrics and the
//! Diebold-Mariano model selection used to compare them, plus CSV I/O and
//! a seeded synthetic generator.

pub mod baselines;
pub mod cli;
pub mod conjugate;
pub mod data;
pub mod dm;
pub mod error;
pub mod evaluate;
pub mod forecaster;
pub mod json;
pub mod metrics;
pub mod synthetic;

pub use conjugate::{boost, log1p_residual, GammaPoissonState, NormalGammaState};
pub use data::{parse_series_csv, CountSeries};
pub use error::{Error, Result};
pub use forecaster::{run_series, ForecastRecord, ForecasterConfig, ForecasterState, Phase, Prediction};
