use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use stable_mallows_ffi::*;

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    sm_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(sm_last_error()).to_str().unwrap().to_owned()
}

#[test]
fn gadget_round_trip() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(sm_prefs_gadget(2, &mut g), SmStatus::Ok);
        let (mut lo, mut hi) = (0, 0);
        assert_eq!(sm_prefs_domain(g, &mut lo, &mut hi), SmStatus::Ok);
        assert_eq!((lo, hi), (-2, 2));

        let mut json = ptr::null_mut();
        assert_eq!(sm_prefs_to_json(g, &mut json), SmStatus::Ok);
        let text = CString::new(take(json)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(sm_prefs_from_json(text.as_ptr(), &mut back), SmStatus::Ok);

        for p in [g, back] {
            let mut dec = ptr::null_mut();
            let mut log = f64::NAN;
            assert_eq!(sm_count_stable(p, 1000, &mut dec, &mut log), SmStatus::Ok);
            assert_eq!(take(dec), "2");
            assert!((log - 2f64.ln()).abs() < 1e-12);
        }

        let mut dj = ptr::null_mut();
        assert_eq!(sm_decompose_json(g, SM_METHOD_EXACT, 1000, &mut dj), SmStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(dj)).unwrap();
        assert_eq!(v["total_count"], "2");
        sm_prefs_free(g);
        sm_prefs_free(back);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sm_prefs_sample(1.5, 10, 0, &mut p), SmStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(last_error().contains("q must lie in (0, 1)"));

        assert_eq!(sm_prefs_sample(0.5, 10, 0, ptr::null_mut()), SmStatus::NullPointer);

        let bad = CString::new(r#"{"domain":[1,2],"women":[[1,2],[1,1]],"men":[[1,2],[2,1]]}"#).unwrap();
        assert_eq!(sm_prefs_from_json(bad.as_ptr(), &mut p), SmStatus::Malformed);
        assert!(last_error().contains("/women/1"), "{}", last_error());

        assert_eq!(sm_prefs_sample(0.9, 200, 3, &mut p), SmStatus::Ok);
        let mut dec = ptr::null_mut();
        assert_eq!(sm_count_stable(p, 1, &mut dec, ptr::null_mut()), SmStatus::BudgetExceeded);
        assert!(dec.is_null());
        let mut dj = ptr::null_mut();
        assert_eq!(sm_decompose_json(p, 7, 1000, &mut dj), SmStatus::InvalidArgument);
        assert_eq!(sm_count_stable(ptr::null(), 1, &mut dec, ptr::null_mut()), SmStatus::NullPointer);
        sm_prefs_free(p);
        sm_prefs_free(ptr::null_mut());
        sm_string_free(ptr::null_mut());
        assert!(!last_error().is_empty());
    }
}

#[test]
fn bounds_and_estimates() {
    unsafe {
        let (mut log, mut finite) = (0.0, 0);
        assert_eq!(sm_rho_lower_bound(1e-60, 1, &mut log, &mut finite), SmStatus::Ok);
        assert_eq!(finite, 1);
        assert!((log.exp() - 0.9840).abs() < 1e-3);
        assert_eq!(sm_rho_lower_bound(0.9, 10, &mut log, &mut finite), SmStatus::Ok);
        assert_eq!(finite, 0);

        let mut csv = ptr::null_mut();
        let (mut g, mut se) = (f64::NAN, f64::NAN);
        assert_eq!(sm_estimate_gamma_csv(0.5, 30, 5, 7, SM_METHOD_AUTO, 1_000_000, &mut csv, &mut g, &mut se), SmStatus::Ok);
        let text = take(csv);
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("q,n,trial,log_count,blocks,max_block\n"));
        assert!(g >= 0.0 && se >= 0.0);
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/stable_mallows.h");
    let source = format!("#include \"{header}\"\nint main(void) {{ return SM_STATUS_OK; }}\n");
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("check.c");
    std::fs::write(&file, source).unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&file).status() {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler found; header not compiled"),
    }
}
