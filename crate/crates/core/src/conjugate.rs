//! Closed-form conjugate updates for the two models behind the boosted
//! forecaster: a Gamma prior on a Poisson demand rate, and a Normal-Gamma
//! prior on the mean and precision of log1p-scale residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate used for the Gamma prior when the first observation is zero.
pub const ZERO_START_BETA: f64 = 0.0001;
/// Prior mean implied by the zero-start rule (`alpha = beta * 100`).
pub const ZERO_START_MEAN: f64 = 100.0;

/// Gamma posterior over a Poisson rate.
///
/// The state keeps the prior in mean/rate form and the evidence as exact
/// integer sums, so `alpha = prior_mean * prior_beta + sum_x` and
/// `beta = prior_beta + n`. Updates commute exactly and a constant series
/// whose value equals the prior mean stays a bitwise fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoissonState {
    prior_mean: f64,
    prior_beta: f64,
    sum_x: u64,
    n: u64,
}

impl GammaPoissonState {
    /// Builds a prior `Gamma(alpha, beta)`; both must be finite and positive.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!("gamma shape must be > 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Config(format!("gamma rate must be > 0, got {beta}")));
        }
        Ok(Self {
            prior_mean: alpha / beta,
            prior_beta: beta,
            sum_x: 0,
            n: 0,
        })
    }

    /// Prior derived from the first observation of a series.
    ///
    /// For `x1 > 0` the rate is `10^-floor(log10 x1)` and the shape is
    /// `x1 * rate`, so the prior mean is `x1` with a pseudo-count below one
    /// period. For `x1 = 0` the rate is `0.0001` and the mean is 100.
    pub fn from_first_observation(x1: u64) -> Self {
        if x1 == 0 {
            return Self {
                prior_mean: ZERO_START_MEAN,
                prior_beta: ZERO_START_BETA,
                sum_x: 0,
                n: 0,
            };
        }
        // floor(log10 x1) is the decimal digit count minus one; 10^19 < u64::MAX.
        let exponent = x1.ilog10();
        let beta = 1.0 / 10u64.pow(exponent) as f64;
        Self {
            prior_mean: x1 as f64,
            prior_beta: beta,
            sum_x: 0,
            n: 0,
        }
    }

    /// Posterior after observing one more count.
    #[must_use]
    pub fn update(self, x: u64) -> Self {
        Self {
            sum_x: self.sum_x + x,
            n: self.n + 1,
            ..self
        }
    }

    pub fn alpha(&self) -> f64 {
        self.prior_mean * self.prior_beta + self.sum_x as f64
    }

    pub fn beta(&self) -> f64 {
        self.prior_beta + self.n as f64
    }

    /// Posterior mean `alpha / beta`, the one-step-ahead count forecast.
    pub fn mean(&self) -> f64 {
        // Written as a correction to the prior mean: for evidence that
        // matches the prior mean the correction is exactly zero.
        let excess = self.sum_x as f64 - self.n as f64 * self.prior_mean;
        (self.prior_mean + excess / self.beta()).max(0.0)
    }

    /// Number of counts absorbed since the prior.
    pub fn observations(&self) -> u64 {
        self.n
    }

    pub fn sum_x(&self) -> u64 {
        self.sum_x
    }
}

/// `ln(x + 1) - ln(lambda_hat + 1)`: the additive log1p-scale residual of a
/// rate forecast.
pub fn log1p_residual(x: u64, lambda_hat: f64) -> f64 {
    (x as f64).ln_1p() - lambda_hat.ln_1p()
}

/// Boosted forecast `lambda_hat + max(0, exp(mu_hat) - 1)`.
pub fn boost(lambda_hat: f64, mu_hat: f64) -> f64 {
    lambda_hat + mu_hat.exp_m1().max(0.0)
}

/// Normal-Gamma prior over the mean and precision of residuals, together
/// with the running sufficient statistics of the residuals seen so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaState {
    pub m: f64,
    pub kappa: f64,
    pub delta: f64,
    pub eta: f64,
    pub sum_e: f64,
    pub sum_e_sq: f64,
    pub count: u64,
}

impl NormalGammaState {
    /// Fresh state with no residuals observed.
    pub fn new(m: f64, kappa: f64, delta: f64, eta: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Config(format!("prior mean m must be finite, got {m}")));
        }
        for (name, value) in [("kappa", kappa), ("delta", delta), ("eta", eta)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {value}")));
            }
        }
        Ok(Self {
            m,
            kappa,
            delta,
            eta,
            sum_e: 0.0,
            sum_e_sq: 0.0,
            count: 0,
        })
    }

    /// Absorbs one residual. Non-finite residuals are rejected.
    pub fn update(self, e: f64) -> Result<Self> {
        if !e.is_finite() {
            return Err(Error::InvalidInput(format!("residual must be finite, got {e}")));
        }
        Ok(Self {
            sum_e: self.sum_e + e,
            sum_e_sq: self.sum_e_sq + e * e,
            count: self.count + 1,
            ..self
        })
    }

    /// Posterior mean of the residual mean, `(kappa*m + sum_e) / (kappa + N)`.
    pub fn mean(&self) -> f64 {
        (self.kappa * self.m + self.sum_e) / (self.kappa + self.count as f64)
    }

    /// Residual sample mean, if any residual has been seen.
    pub fn sample_mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum_e / self.count as f64)
    }

    /// Gamma posterior `(shape, rate)` of the residual precision, marginal
    /// over the mean: centred sum of squares plus the prior-mean shrinkage
    /// term.
    pub fn precision_posterior(&self) -> (f64, f64) {
        let Some(mean) = self.sample_mean() else {
            return (self.delta, self.eta);
        };
        let n = self.count as f64;
        let centred = (self.sum_e_sq - self.sum_e * self.sum_e / n).max(0.0);
        let shrink = self.kappa * n * (mean - self.m).powi(2) / (2.0 * (self.kappa + n));
        (self.delta + n / 2.0, self.eta + 0.5 * centred + shrink)
    }
}
