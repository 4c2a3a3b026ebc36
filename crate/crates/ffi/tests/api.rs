//! The exported functions called through their C signatures.

use std::ffi::{CStr, CString};
use std::ptr;

use pflab_ffi::*;

fn last_error() -> String {
    let p = pflab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalars_match_the_library() {
    let mut v = f64::NAN;
    unsafe {
        assert_eq!(
            pflab_bridge_hit_prob(1.0, 0.0, 1.0, &mut v),
            PflabStatus::Ok
        );
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(pflab_asian_moment(2, 1.0, &mut v), PflabStatus::Ok);
        assert!((v - 2.0 * (std::f64::consts::E - 2.0)).abs() < 1e-9);
        assert_eq!(pflab_r_of_t(1.0, &mut v), PflabStatus::Ok);
        assert_eq!(v, pflab::closed_forms::r_of_t(1.0).unwrap());
        assert_eq!(pflab_bs_call_gbm(1.0, 1.0, &mut v), PflabStatus::Ok);
        assert_eq!(v, pflab::closed_forms::bs_call_gbm(1.0, 1.0).unwrap());
        let (x, y) = ([0.3, -0.2], [0.5, 0.1]);
        assert_eq!(
            pflab_e_st(0.5, 1.5, x.as_ptr(), y.as_ptr(), 2, &mut v),
            PflabStatus::Ok
        );
        assert!((v - (-2.0f64 * (0.15 - 0.02)).exp()).abs() < 1e-15);
        let s = [0.1, 0.4, 0.9];
        assert_eq!(pflab_c_quadratic(s.as_ptr(), 3, &mut v), PflabStatus::Ok);
        assert!((v - (6.0 * 0.1 + 2.0 * 0.3)).abs() < 1e-15);
        let mut inside = false;
        assert_eq!(
            pflab_sloped_sup_prob(1.0, 0.5, 1.0, 0.2, &mut v, &mut inside),
            PflabStatus::Ok
        );
        assert!(inside && (0.0..=1.0).contains(&v));
        assert_eq!(
            pflab_sloped_sup_prob(1.0, 0.5, 1.0, 0.2, &mut v, ptr::null_mut()),
            PflabStatus::Ok
        );
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(
            pflab_h_pfh_lnu(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, &mut v),
            PflabStatus::Domain
        );
        assert!(last_error().contains("s < t"), "{}", last_error());
        assert_eq!(pflab_asian_moment(7, 1.0, &mut v), PflabStatus::Domain);
        assert_eq!(pflab_rho(0.5, ptr::null_mut()), PflabStatus::NullPointer);
        assert_eq!(
            pflab_e_st(0.0, 1.0, ptr::null(), ptr::null(), 2, &mut v),
            PflabStatus::NullPointer
        );
        let unordered = [0.5, 0.1];
        assert_eq!(
            pflab_c_quadratic(unordered.as_ptr(), 2, &mut v),
            PflabStatus::Domain
        );
    }
}

#[test]
fn law_handle_lifecycle() {
    let mut law = ptr::null_mut();
    let mut v = 0.0;
    unsafe {
        assert_eq!(pflab_law_g_nu(0.5, -0.5, 1.0, &mut law), PflabStatus::Ok);
        assert!(!law.is_null());
        assert_eq!(pflab_law_total_mass(law, &mut v), PflabStatus::Ok);
        assert!((v - 1.0).abs() < 1e-6);
        let mut atom = 0.0;
        assert_eq!(pflab_law_atom(law, &mut atom), PflabStatus::Ok);
        assert_eq!(pflab_law_cdf(law, 0.0, &mut v), PflabStatus::Ok);
        assert!((v - atom).abs() < 1e-12);
        assert_eq!(pflab_law_density(law, 0.5, &mut v), PflabStatus::Ok);
        assert!(v > 0.0);
        pflab_law_free(law);
        pflab_law_free(ptr::null_mut());
        assert_eq!(
            pflab_law_atom(ptr::null(), &mut v),
            PflabStatus::NullPointer
        );
        assert_eq!(pflab_law_g0(0.0, -1.0, &mut law), PflabStatus::Domain);
    }
}

#[test]
fn experiment_round_trip() {
    let mut cfg = pflab_run_config_default();
    assert_eq!(cfg.paths, 100_000);
    cfg.paths = 2000;
    let name = CString::new("reflection").unwrap();
    let mut summary = ptr::null_mut();
    unsafe {
        assert_eq!(
            pflab_run_experiment(name.as_ptr(), &cfg, &mut summary),
            PflabStatus::Ok
        );
        let (mut passed, mut failed) = (0usize, usize::MAX);
        assert_eq!(
            pflab_summary_counts(summary, &mut passed, &mut failed),
            PflabStatus::Ok
        );
        assert!(passed > 0 && failed == 0);
        let mut json = ptr::null_mut();
        assert_eq!(pflab_summary_json(summary, &mut json), PflabStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        pflab_string_free(json);
        pflab_summary_free(summary);
        let v: Vec<&str> = text.matches("\"check\"").collect();
        assert_eq!(
            v.len(),
            passed + failed + text.matches("\"gated\": false").count()
        );

        let bad = CString::new("nope").unwrap();
        assert_eq!(
            pflab_run_experiment(bad.as_ptr(), &cfg, &mut summary),
            PflabStatus::UnknownExperiment
        );
        cfg.paths = 0;
        assert_eq!(
            pflab_run_experiment(name.as_ptr(), &cfg, &mut summary),
            PflabStatus::Config
        );
        assert_eq!(
            pflab_run_experiment(ptr::null(), &cfg, &mut summary),
            PflabStatus::NullPointer
        );
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(pflab_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
