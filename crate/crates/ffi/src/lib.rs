//! C ABI over the countboost forecaster.
//!
//! Every function returns a [`CbStatus`]; on failure the message is kept
//! per thread and can be read with [`cb_last_error_message`]. Forecaster
//! state lives behind an opaque [`CbForecaster`] pointer that the caller
//! must release with [`cb_forecaster_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use countboost::dm::{dm_statistic, DmVerdict, VarianceDivisor};
use countboost::metrics::{self, PocidDivisor};
use countboost::{Error, ForecasterConfig, ForecasterState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    LengthMismatch = 4,
    Degenerate = 5,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbDivisor {
    N = 0,
    NMinusOne = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbVerdict {
    AWins = 0,
    BWins = 1,
    Inconclusive = 2,
    Tie = 3,
    Degenerate = 4,
}

/// Residual model hyperparameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbConfig {
    pub kappa: f64,
    pub m: f64,
    pub delta: f64,
    pub eta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CbPrediction {
    pub lambda_hat: f64,
    pub mu_hat: f64,
    pub x_hat: f64,
}

/// `statistic` and `p_value` are NaN for ties and degenerate variance.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbDmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mean_d: f64,
    pub variance_d: f64,
    pub n: usize,
    pub verdict: CbVerdict,
}

/// Opaque forecaster handle.
pub struct CbForecaster {
    state: ForecasterState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CbStatus, message: impl Into<String>) -> CbStatus {
    set_error(message.into());
    status
}

fn status_of(err: &Error) -> CbStatus {
    match err {
        Error::Config(_) | Error::EmptyTestWindow { .. } => CbStatus::Config,
        Error::LengthMismatch { .. } => CbStatus::LengthMismatch,
        Error::DegenerateVariance(_) => CbStatus::Degenerate,
        _ => CbStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CbStatus::Ok,
        Ok(Err(e)) => fail(status_of(&e), e.to_string()),
        Err(_) => fail(CbStatus::Panic, "internal panic"),
    }
}

unsafe fn input<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn to_config(c: &CbConfig) -> ForecasterConfig {
    ForecasterConfig {
        kappa: c.kappa,
        m: c.m,
        delta: c.delta,
        eta: c.eta,
        ..ForecasterConfig::default()
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Fills `out` with the default hyperparameters.
///
/// # Safety
/// `out` must be NULL or point to writable memory for one `CbConfig`.
#[no_mangle]
pub unsafe extern "C" fn cb_config_default(out: *mut CbConfig) -> CbStatus {
    if out.is_null() {
        return fail(CbStatus::NullPointer, "out is null");
    }
    let d = ForecasterConfig::default();
    *out = CbConfig {
        kappa: d.kappa,
        m: d.m,
        delta: d.delta,
        eta: d.eta,
    };
    CbStatus::Ok
}

/// Creates a forecaster primed with the first observation. A NULL `config`
/// selects the defaults.
///
/// # Safety
/// `config` must be NULL or valid; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn cb_forecaster_new(x1: u64, config: *const CbConfig, out: *mut *mut CbForecaster) -> CbStatus {
    if out.is_null() {
        return fail(CbStatus::NullPointer, "out is null");
    }
    *out = std::ptr::null_mut();
    let config = if config.is_null() {
        ForecasterConfig::default()
    } else {
        to_config(&*config)
    };
    guard(|| {
        let state = ForecasterState::new(x1, &config)?;
        *out = Box::into_raw(Box::new(CbForecaster { state }));
        Ok(())
    })
}

/// Forecast for the next step.
///
/// # Safety
/// `handle` must come from `cb_forecaster_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_forecaster_predict(handle: *const CbForecaster, out: *mut CbPrediction) -> CbStatus {
    if handle.is_null() || out.is_null() {
        return fail(CbStatus::NullPointer, "handle or out is null");
    }
    let p = (*handle).state.predict();
    *out = CbPrediction {
        lambda_hat: p.lambda_hat,
        mu_hat: p.mu_hat,
        x_hat: p.x_hat,
    };
    CbStatus::Ok
}

/// Absorbs the count `x`. Negative counts are rejected and leave the state
/// untouched.
///
/// # Safety
/// `handle` must come from `cb_forecaster_new`.
#[no_mangle]
pub unsafe extern "C" fn cb_forecaster_observe(handle: *mut CbForecaster, x: i64) -> CbStatus {
    if handle.is_null() {
        return fail(CbStatus::NullPointer, "handle is null");
    }
    let Ok(x) = u64::try_from(x) else {
        return fail(CbStatus::InvalidInput, format!("count must be non-negative, got {x}"));
    };
    let h = &mut *handle;
    guard(|| {
        h.state = h.state.observe(x)?;
        Ok(())
    })
}

/// Number of observations absorbed after the first.
///
/// # Safety
/// `handle` must be NULL or come from `cb_forecaster_new`.
#[no_mangle]
pub unsafe extern "C" fn cb_forecaster_steps(handle: *const CbForecaster) -> u64 {
    if handle.is_null() {
        0
    } else {
        (*handle).state.steps_observed
    }
}

/// # Safety
/// `handle` must be NULL or come from `cb_forecaster_new`, and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn cb_forecaster_free(handle: *mut CbForecaster) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Boosted forecast from a base rate and a log-residual mean.
#[no_mangle]
pub extern "C" fn cb_boost(lambda_hat: f64, mu_hat: f64) -> f64 {
    countboost::boost(lambda_hat, mu_hat)
}

/// POCID in percent. `actual` holds n+1 values starting one step before the
/// first forecast target; `predicted` holds n forecasts.
///
/// # Safety
/// The arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_pocid(
    actual: *const f64,
    actual_len: usize,
    predicted: *const f64,
    predicted_len: usize,
    divisor: CbDivisor,
    out: *mut f64,
) -> CbStatus {
    let (Some(a), Some(p)) = (input(actual, actual_len), input(predicted, predicted_len)) else {
        return fail(CbStatus::NullPointer, "input array is null");
    };
    if out.is_null() {
        return fail(CbStatus::NullPointer, "out is null");
    }
    let divisor = match divisor {
        CbDivisor::N => PocidDivisor::N,
        CbDivisor::NMinusOne => PocidDivisor::NMinusOne,
    };
    guard(|| {
        *out = metrics::pocid(a, p, divisor)?;
        Ok(())
    })
}

/// Mean squared error over equal-length arrays.
///
/// # Safety
/// Both arrays must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_mse(actual: *const f64, predicted: *const f64, len: usize, out: *mut f64) -> CbStatus {
    let (Some(a), Some(p)) = (input(actual, len), input(predicted, len)) else {
        return fail(CbStatus::NullPointer, "input array is null");
    };
    if out.is_null() {
        return fail(CbStatus::NullPointer, "out is null");
    }
    guard(|| {
        *out = metrics::mse(a, p)?;
        Ok(())
    })
}

/// Diebold-Mariano test on forecast errors of models a and b.
///
/// # Safety
/// Both arrays must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cb_dm_test(
    errors_a: *const f64,
    errors_b: *const f64,
    len: usize,
    significance: f64,
    divisor: CbDivisor,
    out: *mut CbDmResult,
) -> CbStatus {
    let (Some(a), Some(b)) = (input(errors_a, len), input(errors_b, len)) else {
        return fail(CbStatus::NullPointer, "input array is null");
    };
    if out.is_null() {
        return fail(CbStatus::NullPointer, "out is null");
    }
    let divisor = match divisor {
        CbDivisor::N => VarianceDivisor::N,
        CbDivisor::NMinusOne => VarianceDivisor::NMinusOne,
    };
    guard(|| {
        let r = dm_statistic(a, b, significance, divisor)?;
        *out = CbDmResult {
            statistic: r.statistic.unwrap_or(f64::NAN),
            p_value: r.p_value.unwrap_or(f64::NAN),
            mean_d: r.mean_d,
            variance_d: r.variance_d,
            n: r.n,
            verdict: match r.verdict {
                DmVerdict::AWins => CbVerdict::AWins,
                DmVerdict::BWins => CbVerdict::BWins,
                DmVerdict::Inconclusive => CbVerdict::Inconclusive,
                DmVerdict::Tie => CbVerdict::Tie,
                DmVerdict::Degenerate => CbVerdict::Degenerate,
            },
        };
        Ok(())
    })
}

/// NUL-terminated library version.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
