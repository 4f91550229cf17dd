//! Sequential one-step-ahead boosted forecasting.
//!
//! A [`ForecasterState`] couples the Gamma-Poisson base model with the
//! Normal-Gamma residual model. Each step forecasts first and only then
//! absorbs the observation, so a forecast never sees its own target.

use serde::{Deserialize, Serialize};

use crate::conjugate::{boost, log1p_residual, GammaPoissonState, NormalGammaState};
use crate::data::{train_len, CountSeries};
use crate::error::{Error, Result};

/// Default share of each series used as the training window.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Hyperparameters of the residual model plus the warm-up switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecasterConfig {
    pub kappa: f64,
    pub m: f64,
    pub delta: f64,
    pub eta: f64,
    /// Replay predict/observe through the training window before scoring.
    /// When off, the training window past the first point is ignored.
    pub warmup: bool,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            m: 0.0,
            delta: 1.0,
            eta: 1.0,
            warmup: true,
        }
    }
}

impl ForecasterConfig {
    pub fn validate(&self) -> Result<()> {
        NormalGammaState::new(self.m, self.kappa, self.delta, self.eta).map(|_| ())
    }
}

/// Whether a record was produced while warming up on training data or while
/// forecasting the scored test window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Warmup,
    Test,
}

/// Point forecasts for the next step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub lambda_hat: f64,
    pub mu_hat: f64,
    pub x_hat: f64,
}

/// One audited step: what was forecast, and (once known) what happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    /// 1-based position of the forecast target within its series.
    pub time_index: usize,
    pub phase: Phase,
    pub lambda_hat: f64,
    pub mu_hat: f64,
    pub x_hat: f64,
    pub observed: Option<u64>,
    pub residual: Option<f64>,
}

impl ForecastRecord {
    /// Record for a forecaster that produces a single point value.
    pub(crate) fn point(time_index: usize, phase: Phase, forecast: f64, observed: u64) -> Self {
        Self {
            time_index,
            phase,
            lambda_hat: forecast,
            mu_hat: 0.0,
            x_hat: forecast,
            observed: Some(observed),
            residual: Some(log1p_residual(observed, forecast)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecasterState {
    pub gp: GammaPoissonState,
    pub ng: NormalGammaState,
    pub steps_observed: u64,
}

impl ForecasterState {
    /// Initialises both models from the first observation.
    pub fn new(x1: u64, config: &ForecasterConfig) -> Result<Self> {
        let ng = NormalGammaState::new(config.m, config.kappa, config.delta, config.eta)?;
        Ok(Self {
            gp: GammaPoissonState::from_first_observation(x1),
            ng,
            steps_observed: 0,
        })
    }

    pub fn predict(&self) -> Prediction {
        let lambda_hat = self.gp.mean();
        let mu_hat = self.ng.mean();
        Prediction {
            lambda_hat,
            mu_hat,
            x_hat: boost(lambda_hat, mu_hat),
        }
    }

    /// Residual of the base forecast against `x`. Measured on `lambda_hat`,
    /// never on the boosted value.
    pub fn residual(&self, x: u64) -> f64 {
        log1p_residual(x, self.gp.mean())
    }

    /// Absorbs `x`: the residual model first, then the base model.
    pub fn observe(self, x: u64) -> Result<Self> {
        let ng = self.ng.update(self.residual(x))?;
        Ok(Self {
            gp: self.gp.update(x),
            ng,
            steps_observed: self.steps_observed + 1,
        })
    }

    /// Predicts, observes `x`, and returns the audited record with the new state.
    pub fn step(self, time_index: usize, phase: Phase, x: u64) -> Result<(Self, ForecastRecord)> {
        let p = self.predict();
        let residual = self.residual(x);
        let next = self.observe(x)?;
        let record = ForecastRecord {
            time_index,
            phase,
            lambda_hat: p.lambda_hat,
            mu_hat: p.mu_hat,
            x_hat: p.x_hat,
            observed: Some(x),
            residual: Some(residual),
        };
        Ok((next, record))
    }
}

/// Output of a full sequential pass over a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub records: Vec<ForecastRecord>,
    pub train_len: usize,
    /// State after the last observation; its prediction is the next-step forecast.
    pub state: ForecasterState,
}

impl Run {
    pub fn test_records(&self) -> impl Iterator<Item = &ForecastRecord> {
        self.records.iter().filter(|r| r.phase == Phase::Test)
    }
}

/// Runs the boosted forecaster over a series split at `train_fraction`.
///
/// With warm-up on, the training points after the first are replayed as
/// warm-up records; the test window is always processed predict-then-observe.
pub fn run_series(series: &CountSeries, train_fraction: f64, config: &ForecasterConfig) -> Result<Run> {
    config.validate()?;
    let counts = series.counts();
    if counts.len() < 3 {
        return Err(Error::SeriesTooShort {
            id: series.id().to_string(),
            len: counts.len(),
            min: 3,
        });
    }
    let train = train_len(counts.len(), train_fraction)?;

    let mut state = ForecasterState::new(counts[0], config)?;
    let mut records = Vec::with_capacity(counts.len() - 1);
    if config.warmup {
        for (i, &x) in counts.iter().enumerate().take(train).skip(1) {
            let (next, record) = state.step(i + 1, Phase::Warmup, x)?;
            records.push(record);
            state = next;
        }
    }
    for (i, &x) in counts.iter().enumerate().skip(train) {
        let (next, record) = state.step(i + 1, Phase::Test, x)?;
        records.push(record);
        state = next;
    }
    Ok(Run {
        records,
        train_len: train,
        state,
    })
}

/// Consumes the whole history and returns the forecast for the step after it.
pub fn forecast_next(counts: &[u64], config: &ForecasterConfig) -> Result<Prediction> {
    config.validate()?;
    let (&first, rest) = counts
        .split_first()
        .ok_or_else(|| Error::InvalidInput("cannot forecast from an empty history".into()))?;
    let state = rest
        .iter()
        .try_fold(ForecasterState::new(first, config)?, |s, &x| s.observe(x))?;
    Ok(state.predict())
}
