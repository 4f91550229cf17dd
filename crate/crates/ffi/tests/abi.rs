use std::ffi::CStr;
use std::ptr;

use countboost_ffi::*;

fn last_error() -> String {
    let p = cb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn forecaster_round_trip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cb_forecaster_new(5, ptr::null(), &mut h), CbStatus::Ok);
        let mut p = CbPrediction::default();
        assert_eq!(cb_forecaster_predict(h, &mut p), CbStatus::Ok);
        assert_eq!((p.lambda_hat, p.mu_hat, p.x_hat), (5.0, 0.0, 5.0));

        assert_eq!(cb_forecaster_observe(h, 7), CbStatus::Ok);
        assert_eq!(cb_forecaster_predict(h, &mut p), CbStatus::Ok);
        assert!((p.lambda_hat - 6.0).abs() < 1e-12);
        assert!((p.mu_hat - 0.143841036).abs() < 1e-6);
        assert!((p.x_hat - 6.154700538).abs() < 1e-6);
        assert_eq!(cb_forecaster_steps(h), 1);
        cb_forecaster_free(h);
    }
}

#[test]
fn matches_core_forecaster() {
    let xs = [3u64, 0, 4, 9, 2, 2, 7, 1, 0, 5];
    let config = countboost::ForecasterConfig::default();
    let mut state = countboost::ForecasterState::new(xs[0], &config).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(cb_forecaster_new(xs[0], ptr::null(), &mut h), CbStatus::Ok);
        for &x in &xs[1..] {
            let mut p = CbPrediction::default();
            cb_forecaster_predict(h, &mut p);
            let q = state.predict();
            assert_eq!(p.x_hat.to_bits(), q.x_hat.to_bits());
            assert_eq!(cb_forecaster_observe(h, x as i64), CbStatus::Ok);
            state = state.observe(x).unwrap();
        }
        cb_forecaster_free(h);
    }
}

#[test]
fn bad_inputs_map_to_status_codes() {
    unsafe {
        let bad = CbConfig {
            kappa: 0.0,
            m: 0.0,
            delta: 1.0,
            eta: 1.0,
        };
        let mut h = ptr::null_mut();
        assert_eq!(cb_forecaster_new(3, &bad, &mut h), CbStatus::Config);
        assert!(h.is_null());
        assert!(last_error().contains("kappa"));

        assert_eq!(
            cb_forecaster_new(3, ptr::null(), ptr::null_mut()),
            CbStatus::NullPointer
        );

        let mut cfg = bad;
        assert_eq!(cb_config_default(&mut cfg), CbStatus::Ok);
        assert_eq!(cb_forecaster_new(3, &cfg, &mut h), CbStatus::Ok);
        assert_eq!(cb_forecaster_observe(h, -1), CbStatus::InvalidInput);
        assert_eq!(cb_forecaster_steps(h), 0);
        assert_eq!(cb_forecaster_observe(ptr::null_mut(), 1), CbStatus::NullPointer);
        cb_forecaster_free(h);
        cb_forecaster_free(ptr::null_mut());
    }
}

#[test]
fn metrics_and_dm() {
    unsafe {
        let actual = [10.0, 12.0, 11.0, 0.0, 15.0, 14.0];
        let predicted = [11.0, 13.0, 5.0, 4.0, 16.0];
        let mut v = 0.0;
        assert_eq!(
            cb_pocid(actual.as_ptr(), 6, predicted.as_ptr(), 5, CbDivisor::N, &mut v),
            CbStatus::Ok
        );
        assert!((v - 50.0).abs() < 1e-12);
        assert_eq!(
            cb_pocid(actual.as_ptr(), 5, predicted.as_ptr(), 5, CbDivisor::N, &mut v),
            CbStatus::LengthMismatch
        );

        let mut m = 0.0;
        assert_eq!(
            cb_mse(actual[1..].as_ptr(), predicted.as_ptr(), 5, &mut m),
            CbStatus::Ok
        );
        assert!((m - 31.0).abs() < 1e-12);

        let ea = [1.0, 1.0, 1.0, 1.0];
        let eb = [2.0, 2.0, 1.0, 1.0];
        let mut r = CbDmResult {
            statistic: 0.0,
            p_value: 0.0,
            mean_d: 0.0,
            variance_d: 0.0,
            n: 0,
            verdict: CbVerdict::Tie,
        };
        assert_eq!(
            cb_dm_test(ea.as_ptr(), eb.as_ptr(), 4, 0.05, CbDivisor::N, &mut r),
            CbStatus::Ok
        );
        assert!((r.mean_d + 1.5).abs() < 1e-12);
        assert_eq!(r.n, 4);

        assert_eq!(
            cb_dm_test(ea.as_ptr(), ea.as_ptr(), 4, 0.05, CbDivisor::N, &mut r),
            CbStatus::Ok
        );
        assert_eq!(r.verdict, CbVerdict::Tie);
        assert!(r.statistic.is_nan());

        assert_eq!(
            cb_dm_test(ptr::null(), eb.as_ptr(), 4, 0.05, CbDivisor::N, &mut r),
            CbStatus::NullPointer
        );
    }
    assert_eq!(cb_boost(4.0, 0.0), 4.0);
    assert!(cb_boost(4.0, -2.0) >= 4.0);
    let version = unsafe { CStr::from_ptr(cb_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
