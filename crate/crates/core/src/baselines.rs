//! Reference forecasters: the last observed value, and a linear
//! autoregression on lags picked by partial autocorrelation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{train_len, CountSeries};
use crate::error::{Error, Result};
use crate::forecaster::{ForecastRecord, Phase};

pub const DEFAULT_LAG_LEVEL: f64 = 0.05;
/// Penalty added to the normal equations when they are singular.
pub const RIDGE_PENALTY: f64 = 1e-8;
/// Relative pivot size below which the normal equations count as singular.
const SINGULAR_PIVOT: f64 = 1e-10;

/// One-step forecasts `x_hat_t = x_{t-1}` over the test window.
pub fn naive_run(series: &CountSeries, train_fraction: f64) -> Result<Vec<ForecastRecord>> {
    let counts = series.counts();
    let train = train_len(counts.len(), train_fraction)?;
    Ok((train..counts.len())
        .map(|i| ForecastRecord::point(i + 1, Phase::Test, counts[i - 1] as f64, counts[i]))
        .collect())
}

/// Partial autocorrelations at lags `1..=max_lag`, by Durbin-Levinson
/// recursion on the biased sample autocorrelations.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(Error::InvalidInput(format!(
            "max lag must satisfy 1 <= max_lag < n/2 (n = {n}, max_lag = {max_lag})"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let autocov = |k: usize| -> f64 {
        centred[..n - k]
            .iter()
            .zip(&centred[k..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = autocov(0);
    if gamma0 <= f64::EPSILON * mean.abs().max(1.0).powi(2) {
        return Err(Error::DegenerateVariance("PACF of a constant series".into()));
    }
    let r: Vec<f64> = (0..=max_lag).map(|k| autocov(k) / gamma0).collect();

    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = r[k] - (1..k).map(|j| phi[j - 1] * r[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j - 1] * r[j]).sum::<f64>();
        let reflection = if den.abs() > 0.0 {
            (num / den).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let previous = phi.clone();
        for j in 1..k {
            phi[j - 1] = previous[j - 1] - reflection * previous[k - j - 1];
        }
        phi.push(reflection);
        out.push(reflection);
    }
    Ok(out)
}

/// Lags whose partial autocorrelation lies strictly outside the
/// `z_{1-level/2} / sqrt(n)` band.
pub fn select_lags(pacf_values: &[f64], n: usize, level: f64) -> Result<Vec<usize>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "significance level must lie in (0, 1), got {level}"
        )));
    }
    let z = Normal::standard().inverse_cdf(1.0 - level / 2.0);
    let band = z / (n as f64).sqrt();
    Ok(pacf_values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > band)
        .map(|(i, _)| i + 1)
        .collect())
}

/// Default PACF depth for a training window of `n` points.
pub fn default_max_lag(n: usize) -> usize {
    20.min(n / 4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub intercept: f64,
    pub coefficients: BTreeMap<usize, f64>,
    /// Whether the ridge fallback was needed.
    pub ridge: bool,
}

impl ArModel {
    pub fn mean_model(intercept: f64) -> Self {
        Self {
            intercept,
            coefficients: BTreeMap::new(),
            ridge: false,
        }
    }

    pub fn lags(&self) -> Vec<usize> {
        self.coefficients.keys().copied().collect()
    }

    pub fn max_lag(&self) -> usize {
        self.coefficients.keys().next_back().copied().unwrap_or(0)
    }

    /// Unclamped prediction for `history[t]` from the values before it.
    pub fn predict_at(&self, history: &[f64], t: usize) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .map(|(&lag, &c)| c * history[t - lag])
                .sum::<f64>()
    }

    /// Selects lags on `train` at `level` and fits them. A constant or very
    /// short window falls back to the mean model.
    pub fn from_training(train: &[f64], level: f64) -> Result<Self> {
        let max_lag = default_max_lag(train.len());
        let lags = if max_lag == 0 {
            Vec::new()
        } else {
            match pacf(train, max_lag) {
                Ok(values) => select_lags(&values, train.len(), level)?,
                Err(Error::DegenerateVariance(_)) => Vec::new(),
                Err(e) => return Err(e),
            }
        };
        fit_ar(train, &lags)
    }
}

/// Ordinary least squares with intercept on the given lags.
pub fn fit_ar(train: &[f64], lags: &[usize]) -> Result<ArModel> {
    if train.is_empty() {
        return Err(Error::InvalidInput("cannot fit on an empty training window".into()));
    }
    let mut lags = lags.to_vec();
    lags.sort_unstable();
    lags.dedup();
    if lags.first() == Some(&0) {
        return Err(Error::InvalidInput("lags must be positive".into()));
    }
    let Some(&max_lag) = lags.last() else {
        let mean = train.iter().sum::<f64>() / train.len() as f64;
        return Ok(ArModel::mean_model(mean));
    };
    let cols = lags.len() + 1;
    if max_lag >= train.len() || train.len() - max_lag < cols {
        return Err(Error::InvalidInput(format!(
            "{} training points leave too few rows for lags {lags:?}",
            train.len()
        )));
    }
    let rows = train.len() - max_lag;
    let x = DMatrix::from_fn(
        rows,
        cols,
        |r, c| {
            if c == 0 {
                1.0
            } else {
                train[r + max_lag - lags[c - 1]]
            }
        },
    );
    let y = DVector::from_iterator(rows, train[max_lag..].iter().copied());

    let (beta, ridge) = match solve_normal_equations(&x, &y) {
        Some(beta) => (beta, false),
        None => (solve_ridge(&x, &y)?, true),
    };
    Ok(ArModel {
        intercept: beta[0],
        coefficients: lags.iter().zip(beta.iter().skip(1)).map(|(&l, &c)| (l, c)).collect(),
        ridge,
    })
}

fn solve_normal_equations(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let scale = xtx.diagonal().max();
    let chol = xtx.cholesky()?;
    let l = chol.l_dirty();
    let min_pivot = l.diagonal().iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
    if min_pivot.is_nan() || min_pivot <= SINGULAR_PIVOT * scale {
        return None;
    }
    let beta = chol.solve(&xty);
    beta.iter().all(|b| b.is_finite()).then_some(beta)
}

/// Ridge solution as least squares on `[X; sqrt(penalty) I]`.
fn solve_ridge(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = x.shape();
    let root = RIDGE_PENALTY.sqrt();
    let aug = DMatrix::from_fn(rows + cols, cols, |r, c| {
        if r < rows {
            x[(r, c)]
        } else if r - rows == c {
            root
        } else {
            0.0
        }
    });
    let rhs = DVector::from_fn(rows + cols, |r, _| if r < rows { y[r] } else { 0.0 });
    let beta = aug
        .svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidInput(format!("ridge solve failed: {e}")))?;
    if beta.iter().all(|b| b.is_finite()) {
        Ok(beta)
    } else {
        Err(Error::InvalidInput(
            "ridge solve produced non-finite coefficients".into(),
        ))
    }
}

/// One-step forecasts over the test window from observed lagged values,
/// with the model held fixed and negative forecasts clamped to zero.
pub fn ar_run(series: &CountSeries, train_fraction: f64, model: &ArModel) -> Result<Vec<ForecastRecord>> {
    let counts = series.counts();
    let train = train_len(counts.len(), train_fraction)?;
    if model.max_lag() > train {
        return Err(Error::InvalidInput(format!(
            "lag {} reaches before the start of series {:?}",
            model.max_lag(),
            series.id()
        )));
    }
    let history = series.values();
    Ok((train..counts.len())
        .map(|i| {
            let forecast = model.predict_at(&history, i).max(0.0);
            ForecastRecord::point(i + 1, Phase::Test, forecast, counts[i])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn forecasts(records: &[ForecastRecord]) -> Vec<f64> {
        records.iter().map(|r| r.x_hat).collect()
    }

    #[test]
    fn naive_examples() {
        let s = CountSeries::from_counts("n", vec![3, 5, 4]).unwrap();
        let recs = naive_run(&s, 0.34).unwrap();
        assert_eq!(forecasts(&recs), [3.0, 5.0]);
        assert_eq!(recs[0].time_index, 2);

        let s = CountSeries::from_counts("c", vec![4; 10]).unwrap();
        assert!(naive_run(&s, 0.5).unwrap().iter().all(|r| r.x_hat == 4.0));
    }

    #[test]
    fn lag_one_pacf_is_autocorrelation() {
        let xs = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0, 5.0];
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let c0: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let c1: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        assert_abs_diff_eq!(pacf(&xs, 1).unwrap()[0], c1 / c0, epsilon = 1e-14);
    }

    #[test]
    fn pacf_rejects_degenerate_input() {
        assert!(matches!(pacf(&[2.0; 10], 2), Err(Error::DegenerateVariance(_))));
        assert!(pacf(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
        assert!(pacf(&[1.0, 2.0, 3.0, 4.0], 0).is_err());
    }

    #[test]
    fn lag_selection_band() {
        assert_eq!(select_lags(&[0.5, 0.10], 100, 0.05).unwrap(), [1]);
        assert!(select_lags(&[0.1, -0.15, 0.0], 100, 0.05).unwrap().is_empty());
        // Band at n = 400 is 1.959964 / 20 = 0.0979982.
        assert_eq!(select_lags(&[0.097, 0.099], 400, 0.05).unwrap(), [2]);
        assert_eq!(select_lags(&[0.0979, 0.0980], 400, 0.05).unwrap(), [2]);
        assert_eq!(select_lags(&[-0.099, 0.10], 400, 0.05).unwrap(), [1, 2]);
        assert!(select_lags(&[0.5], 100, 1.0).is_err());
    }

    #[test]
    fn exact_recovery_of_noise_free_ar1() {
        let mut xs = vec![10.0];
        for _ in 0..11 {
            let last = *xs.last().unwrap();
            xs.push(2.0 + 0.5 * last);
        }
        let model = fit_ar(&xs[..12], &[1]).unwrap();
        assert!(!model.ridge);
        assert_abs_diff_eq!(model.intercept, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(model.coefficients[&1], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn empty_lags_fit_the_mean() {
        let model = fit_ar(&[4.0, 6.0, 8.0], &[]).unwrap();
        assert_eq!(model.intercept, 6.0);
        assert!(model.coefficients.is_empty());
    }

    #[test]
    fn collinear_design_uses_ridge() {
        let xs: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 3.0 } else { 7.0 }).collect();
        let model = fit_ar(&xs, &[1, 2, 4]).unwrap();
        assert!(model.ridge);
        assert!(model.intercept.is_finite());
        assert!(model.coefficients.values().all(|c| c.is_finite()));
        // The fit still reproduces the periodic series.
        for t in 4..xs.len() {
            assert_abs_diff_eq!(model.predict_at(&xs, t), xs[t], epsilon = 1e-4);
        }
    }

    #[test]
    fn fit_rejects_insufficient_rows() {
        assert!(fit_ar(&[1.0, 2.0, 3.0], &[2]).is_err());
        assert!(fit_ar(&[1.0, 2.0, 3.0], &[3]).is_err());
        assert!(fit_ar(&[], &[]).is_err());
    }

    #[test]
    fn ar_run_examples() {
        let s = CountSeries::from_counts("a", vec![3, 9, 4, 8, 1, 6, 2, 7]).unwrap();
        let mean = ArModel::mean_model(5.5);
        assert!(ar_run(&s, 0.5, &mean).unwrap().iter().all(|r| r.x_hat == 5.5));

        let unit = ArModel {
            intercept: 0.0,
            coefficients: BTreeMap::from([(1, 1.0)]),
            ridge: false,
        };
        assert_eq!(ar_run(&s, 0.5, &unit).unwrap(), naive_run(&s, 0.5).unwrap());

        let negative = ArModel::mean_model(-3.0);
        assert!(ar_run(&s, 0.5, &negative).unwrap().iter().all(|r| r.x_hat == 0.0));

        let deep = ArModel {
            intercept: 0.0,
            coefficients: BTreeMap::from([(6, 1.0)]),
            ridge: false,
        };
        assert!(ar_run(&s, 0.5, &deep).is_err());
    }

    #[test]
    fn constant_training_window_falls_back_to_mean() {
        let model = ArModel::from_training(&[9.0; 40], DEFAULT_LAG_LEVEL).unwrap();
        assert_eq!(model, ArModel::mean_model(9.0));
    }
}
