//! Diebold-Mariano comparison of two forecasters under squared-error loss,
//! and the per-series best-model rule built on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::metrics::MetricReport;

pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

/// Divisor of the loss-differential variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VarianceDivisor {
    #[default]
    #[serde(rename = "n")]
    N,
    #[serde(rename = "n-1")]
    NMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

impl Side {
    fn flip(self) -> Self {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmVerdict {
    AWins,
    BWins,
    Inconclusive,
    /// Every loss differential is exactly zero.
    Tie,
    /// Constant non-zero loss differential: no variance, the sign decides.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub mean_d: f64,
    pub variance_d: f64,
    pub n: usize,
    pub verdict: DmVerdict,
    /// Side with the lower squared-error loss, when one is identified.
    pub favors: Option<Side>,
}

impl DmResult {
    /// The same comparison with the two forecasters swapped.
    pub fn swapped(&self) -> Self {
        let verdict = match self.verdict {
            DmVerdict::AWins => DmVerdict::BWins,
            DmVerdict::BWins => DmVerdict::AWins,
            other => other,
        };
        Self {
            statistic: self.statistic.map(|s| -s),
            mean_d: -self.mean_d,
            verdict,
            favors: self.favors.map(Side::flip),
            ..self.clone()
        }
    }

    pub fn is_significant(&self) -> bool {
        matches!(self.verdict, DmVerdict::AWins | DmVerdict::BWins)
    }
}

/// Two-tailed standard normal p-value of `z`.
pub fn two_tailed_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Diebold-Mariano test on forecast errors `x_t - x_hat_t` of models a and b.
/// Negative statistics favour a.
pub fn dm_statistic(
    errors_a: &[f64],
    errors_b: &[f64],
    significance: f64,
    divisor: VarianceDivisor,
) -> Result<DmResult> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::LengthMismatch {
            expected: errors_a.len(),
            actual: errors_b.len(),
        });
    }
    let n = errors_a.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("DM test needs n >= 2, got {n}")));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::Config(format!(
            "significance must lie in (0, 1), got {significance}"
        )));
    }

    let d: Vec<f64> = errors_a.iter().zip(errors_b).map(|(a, b)| a * a - b * b).collect();
    let nf = n as f64;
    let mean_d = d.iter().sum::<f64>() / nf;
    let ss: f64 = d.iter().map(|v| (v - mean_d).powi(2)).sum();
    let variance_d = match divisor {
        VarianceDivisor::N => ss / nf,
        VarianceDivisor::NMinusOne => ss / (nf - 1.0),
    };
    let by_sign = |v: f64| if v < 0.0 { Side::A } else { Side::B };

    if d.iter().all(|&v| v == 0.0) {
        return Ok(DmResult {
            statistic: None,
            p_value: None,
            mean_d,
            variance_d,
            n,
            verdict: DmVerdict::Tie,
            favors: None,
        });
    }
    if variance_d == 0.0 {
        return Ok(DmResult {
            statistic: None,
            p_value: None,
            mean_d,
            variance_d,
            n,
            verdict: DmVerdict::Degenerate,
            favors: Some(by_sign(mean_d)),
        });
    }

    let statistic = mean_d / (variance_d / nf).sqrt();
    let p = two_tailed_p(statistic);
    let (verdict, favors) = if p < significance {
        match by_sign(statistic) {
            Side::A => (DmVerdict::AWins, Some(Side::A)),
            Side::B => (DmVerdict::BWins, Some(Side::B)),
        }
    } else {
        (DmVerdict::Inconclusive, None)
    };
    Ok(DmResult {
        statistic: Some(statistic),
        p_value: Some(p),
        mean_d,
        variance_d,
        n,
        verdict,
        favors,
    })
}

/// Pairwise DM results keyed by `(a, b)` with `a < b`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DmMatrix {
    pairs: BTreeMap<(String, String), DmResult>,
}

impl DmMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the comparison of `a` (slot m_a) against `b`.
    pub fn insert(&mut self, a: &str, b: &str, result: DmResult) {
        if a <= b {
            self.pairs.insert((a.to_string(), b.to_string()), result);
        } else {
            self.pairs.insert((b.to_string(), a.to_string()), result.swapped());
        }
    }

    /// Comparison with `a` in slot m_a.
    pub fn get(&self, a: &str, b: &str) -> Option<DmResult> {
        if a <= b {
            self.pairs.get(&(a.to_string(), b.to_string())).cloned()
        } else {
            self.pairs.get(&(b.to_string(), a.to_string())).map(DmResult::swapped)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &DmResult)> {
        self.pairs.iter()
    }
}

/// Where a per-series decision came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    /// The top-POCID model beat the runner-up significantly.
    Significant,
    /// No significant superiority; the proposed model is kept.
    Fallback,
    /// The top two models have identical losses.
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    /// Winning model, absent on a tie.
    pub winner: Option<String>,
    pub source: DecisionSource,
    /// Human-readable outcome: `"<model> Wins"`, `"Inconclusive"` or `"Tie"`.
    pub label: String,
    /// Highest-POCID model, and the one ranked after it.
    pub best_pocid: String,
    pub runner_up: String,
    /// Model compared against the proposed one in the reported statistic.
    pub comparator: String,
    /// DM statistic with the proposed model as m_a; negative favours it.
    pub dm_statistic: Option<f64>,
    pub p_value: Option<f64>,
}

/// Picks the best model for one series.
///
/// Models are ranked by POCID (the proposed model first among equals). The
/// top model wins if the MSE-based DM test shows it significantly better
/// than the runner-up; identical losses are a tie; otherwise the proposed
/// model wins by fallback.
pub fn best_model_per_series(
    reports: &BTreeMap<String, MetricReport>,
    matrix: &DmMatrix,
    proposed: &str,
) -> Result<Decision> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("no models to compare".into()));
    }
    if !reports.contains_key(proposed) {
        return Err(Error::InvalidInput(format!(
            "proposed model {proposed:?} not among models"
        )));
    }
    let mut ranked: Vec<(&String, &MetricReport)> = reports.iter().collect();
    ranked.sort_by(|(ia, ra), (ib, rb)| {
        rb.pocid
            .total_cmp(&ra.pocid)
            .then_with(|| (ia.as_str() != proposed).cmp(&(ib.as_str() != proposed)))
            .then_with(|| ia.cmp(ib))
    });

    let best = ranked[0].0.clone();
    let Some(runner_up) = ranked.get(1).map(|(id, _)| (*id).clone()) else {
        return Ok(Decision {
            winner: Some(best.clone()),
            source: DecisionSource::Fallback,
            label: format!("{best} Wins"),
            best_pocid: best.clone(),
            runner_up: best.clone(),
            comparator: best,
            dm_statistic: None,
            p_value: None,
        });
    };
    let lookup = |a: &str, b: &str| {
        matrix
            .get(a, b)
            .ok_or_else(|| Error::InvalidInput(format!("missing DM result for ({a}, {b})")))
    };

    let head_to_head = lookup(&best, &runner_up)?;
    let comparator = if best == proposed {
        runner_up.clone()
    } else {
        best.clone()
    };
    let reported = lookup(proposed, &comparator)?;

    let (winner, source) = match (head_to_head.verdict, head_to_head.favors) {
        (DmVerdict::Tie, _) => (None, DecisionSource::Tie),
        (DmVerdict::AWins, _) | (DmVerdict::Degenerate, Some(Side::A)) => {
            (Some(best.clone()), DecisionSource::Significant)
        }
        _ => (Some(proposed.to_string()), DecisionSource::Fallback),
    };
    let label = match (&winner, source) {
        (None, _) => "Tie".to_string(),
        (Some(_), DecisionSource::Fallback) => "Inconclusive".to_string(),
        (Some(w), _) => format!("{w} Wins"),
    };
    Ok(Decision {
        winner,
        source,
        label,
        best_pocid: best,
        runner_up,
        comparator,
        dm_statistic: reported.statistic,
        p_value: reported.p_value,
    })
}
