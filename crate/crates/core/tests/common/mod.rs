//! Independent reference implementations used to cross-check the library.
#![allow(dead_code, clippy::needless_range_loop)]

use statrs::function::gamma::ln_gamma;

/// Posterior mean of Gamma(alpha, beta) by Simpson's rule on u = ln(lambda).
pub fn gamma_mean_by_quadrature(alpha: f64, beta: f64) -> f64 {
    let ln_norm = alpha * beta.ln() - ln_gamma(alpha);
    // mass of lambda * density, in log space: lambda^(alpha+1) e^(-beta lambda) d(ln lambda)
    let f = |u: f64| (ln_norm + (alpha + 1.0) * u - beta * u.exp()).exp();
    // window around the mode of ln(lambda), wide enough on the left for the
    // heavy tail at small alpha
    let mode = ((alpha + 1.0) / beta).ln();
    let spread = 1.0 / (alpha + 1.0).sqrt();
    let lower = mode - 40.0 / (alpha + 1.0) - 14.0 * spread;
    let upper = mode + 3.0 + 14.0 * spread;
    let intervals = 20_000;
    let h = (upper - lower) / intervals as f64;
    let mut sum = f(lower) + f(upper);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lower + i as f64 * h);
    }
    sum * h / 3.0
}

fn sign(v: f64) -> i32 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Directional accuracy percentage. `actual[0]` precedes the first target.
pub fn pocid_loop(actual: &[f64], predicted: &[f64], divisor: f64) -> f64 {
    let mut hits = 0usize;
    for t in 1..actual.len() {
        if sign(predicted[t - 1] - actual[t - 1]) == sign(actual[t] - actual[t - 1]) {
            hits += 1;
        }
    }
    100.0 * hits as f64 / divisor
}

pub fn mse_loop(target: &[f64], predicted: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..target.len() {
        let e = target[i] - predicted[i];
        s += e * e;
    }
    s / target.len() as f64
}

pub fn mape_loop(target: &[f64], predicted: &[f64]) -> Option<f64> {
    let mut s = 0.0;
    let mut k = 0;
    for i in 0..target.len() {
        if target[i] != 0.0 {
            s += ((target[i] - predicted[i]) / target[i]).abs();
            k += 1;
        }
    }
    (k > 0).then(|| 100.0 * s / k as f64)
}

pub fn theil_loop(actual: &[f64], predicted: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 1..actual.len() {
        num += (actual[t] - predicted[t - 1]).powi(2);
        den += (actual[t] - actual[t - 1]).powi(2);
    }
    (den > 0.0).then(|| num / den)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// PACF at lag k as the last coefficient of a least-squares regression of the
/// demeaned series on its first k lags, with k zeros padded on both ends.
pub fn pacf_by_regression(series: &[f64], k: usize) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut padded = vec![0.0; k];
    padded.extend(series.iter().map(|v| v - mean));
    padded.resize(padded.len() + k, 0.0);
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for t in k..padded.len() {
        for i in 0..k {
            xty[i] += padded[t - 1 - i] * padded[t];
            for j in 0..k {
                xtx[i][j] += padded[t - 1 - i] * padded[t - 1 - j];
            }
        }
    }
    solve(xtx, xty)[k - 1]
}

/// Two-tailed normal p-value through the Maclaurin series of erf.
pub fn two_tailed_p_series(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
}
