//! Forecast accuracy measures.
//!
//! `pocid` and `theil_u` take the actual window `x_1..x_n` together with
//! forecasts aligned to `x_2..x_n`, since both compare each step with the
//! value before it. `mse` and `mape` take equal-length slices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Divisor applied to the POCID hit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PocidDivisor {
    /// The window length `n`, although only `n - 1` steps are scored.
    #[default]
    #[serde(rename = "n")]
    N,
    /// The number of scored steps.
    #[serde(rename = "n-1")]
    NMinusOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub pocid: f64,
    pub mse: f64,
    pub mape: Option<f64>,
    pub mape_skipped: usize,
    pub theil_u: Option<f64>,
    pub n_effective: usize,
}

impl MetricReport {
    /// All measures for forecasts of `actual[1..]`, with `actual[0]` the last
    /// point before the scored window.
    pub fn compute(actual: &[f64], predicted: &[f64], divisor: PocidDivisor) -> Result<Self> {
        check_lagged(actual, predicted)?;
        let target = &actual[1..];
        let (mape, mape_skipped) = mape(target, predicted)?;
        Ok(Self {
            pocid: pocid(actual, predicted, divisor)?,
            mse: mse(target, predicted)?,
            mape,
            mape_skipped,
            theil_u: theil_u(actual, predicted)?,
            n_effective: predicted.len(),
        })
    }
}

fn check_lagged(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if predicted.is_empty() || actual.len() != predicted.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: actual.len().saturating_sub(1).max(1),
            actual: predicted.len(),
        });
    }
    Ok(())
}

fn check_equal(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidInput("metric over an empty window".into()));
    }
    Ok(())
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Percentage of steps whose forecast direction matches the actual
/// direction. A flat forecast on a flat step counts as a match.
pub fn pocid(actual: &[f64], predicted: &[f64], divisor: PocidDivisor) -> Result<f64> {
    check_lagged(actual, predicted)?;
    let hits = actual
        .windows(2)
        .zip(predicted)
        .filter(|(w, &p)| sign(p - w[0]) == sign(w[1] - w[0]))
        .count();
    let denom = match divisor {
        PocidDivisor::N => actual.len(),
        PocidDivisor::NMinusOne => predicted.len(),
    };
    Ok(100.0 * hits as f64 / denom as f64)
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_equal(actual, predicted)?;
    let ss: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).powi(2)).sum();
    Ok(ss / actual.len() as f64)
}

/// Mean absolute percentage error over the non-zero actuals, with the
/// number of zero actuals skipped. `None` when every actual is zero.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<(Option<f64>, usize)> {
    check_equal(actual, predicted)?;
    let mut total = 0.0;
    let mut used = 0usize;
    for (&a, &p) in actual.iter().zip(predicted) {
        if a != 0.0 {
            total += ((a - p) / a).abs();
            used += 1;
        }
    }
    let skipped = actual.len() - used;
    Ok(((used > 0).then(|| 100.0 * total / used as f64), skipped))
}

/// Squared error relative to the random walk. `None` on a constant window.
pub fn theil_u(actual: &[f64], predicted: &[f64]) -> Result<Option<f64>> {
    check_lagged(actual, predicted)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, &p) in actual.windows(2).zip(predicted) {
        num += (w[1] - p).powi(2);
        den += (w[1] - w[0]).powi(2);
    }
    Ok((den != 0.0).then(|| num / den))
}
