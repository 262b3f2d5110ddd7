use std::ffi::{CStr, CString};
use std::ptr;

use regcomp_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rc_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn model(spec: &str) -> *mut RcModel {
    let spec = CString::new(spec).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rc_model_parse(spec.as_ptr(), &mut m) }, RcStatus::Ok);
    m
}

fn regularizer(spec: &str, m: *const RcModel) -> *mut RcRegularizer {
    let spec = CString::new(spec).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { rc_regularizer_parse(spec.as_ptr(), m, &mut r) },
        RcStatus::Ok,
        "{}",
        last_error()
    );
    r
}

#[test]
fn compliance_round_trip() {
    let m = model("sparse:k=2,n=10");
    let r = regularizer("l1", m);
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(rc_compliance(m, r, 1000, 0, 1, &mut report), RcStatus::Ok);
        let mut values = std::mem::zeroed::<RcReportValues>();
        assert_eq!(rc_report_values(report, &mut values), RcStatus::Ok);
        assert!((values.delta_nec - 29.0 / 41.0).abs() < 1e-15);
        assert!((values.delta_suff - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let mut json = ptr::null_mut();
        assert_eq!(rc_report_json(report, &mut json), RcStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        rc_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["method"], "closed_form");

        rc_report_free(report);
        rc_regularizer_free(r);
        rc_model_free(m);
    }
}

#[test]
fn projection_norm_and_cone() {
    let m = model("sparse:k=1,n=3");
    let r = regularizer("l1", m);
    let z = [2.0, -1.0, -1.0];
    let mut p = [0.0; 3];
    let (mut norm, mut inside, mut value) = (0.0, false, 0.0);
    unsafe {
        assert_eq!(rc_model_point_len(m), 3);
        assert_eq!(rc_model_project(m, z.as_ptr(), 3, p.as_mut_ptr()), RcStatus::Ok);
        assert_eq!(rc_model_norm(m, z.as_ptr(), 3, &mut norm), RcStatus::Ok);
        assert_eq!(rc_regularizer_eval(r, m, z.as_ptr(), 3, &mut value), RcStatus::Ok);
        assert_eq!(rc_in_descent_cone(r, m, z.as_ptr(), 3, &mut inside), RcStatus::Ok);
        rc_regularizer_free(r);
        rc_model_free(m);
    }
    assert_eq!(p, [2.0, 0.0, 0.0]);
    assert_eq!(norm, 4.0);
    assert_eq!(value, 4.0);
    assert!(inside);
}

#[test]
fn matrix_points_are_dense() {
    let m = model("lowrank:r=1,n=2");
    let z = [3.0, 0.0, 0.0, -1.0];
    let mut p = [0.0; 4];
    unsafe {
        assert_eq!(rc_model_point_len(m), 4);
        assert_eq!(rc_model_project(m, z.as_ptr(), 4, p.as_mut_ptr()), RcStatus::Ok);
        assert_eq!(
            rc_model_project(m, z.as_ptr(), 3, p.as_mut_ptr()),
            RcStatus::DimensionMismatch
        );
        rc_model_free(m);
    }
    for (a, b) in p.iter().zip([3.0, 0.0, 0.0, 0.0]) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new("sparse:k=2").unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(rc_model_parse(bad.as_ptr(), &mut m), RcStatus::InvalidModel);
        assert!(m.is_null());
        assert!(last_error().contains("missing field"));
        assert_eq!(rc_model_parse(ptr::null(), &mut m), RcStatus::NullPointer);
        assert_eq!(rc_model_parse(bad.as_ptr(), ptr::null_mut()), RcStatus::NullPointer);

        let lr = model("lowrank:r=1,n=4");
        let l1 = CString::new("l1").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(rc_regularizer_parse(l1.as_ptr(), lr, &mut r), RcStatus::Incompatible);
        assert!(last_error().contains("nuclear"));
        rc_model_free(lr);

        let full = model("sparse:k=2,n=3");
        let reg = regularizer("l1", full);
        let mut report = ptr::null_mut();
        assert_eq!(rc_compliance(full, reg, 10, 0, 1, &mut report), RcStatus::Undefined);
        rc_regularizer_free(reg);
        rc_model_free(full);

        rc_model_free(ptr::null_mut());
        assert_eq!(rc_model_point_len(ptr::null()), 0);
    }
    let ok = model("sparse:k=1,n=3");
    assert!(last_error().is_empty());
    unsafe { rc_model_free(ok) };
}

#[test]
fn optimal_weights_for_equal_levels() {
    let mut o = unsafe { std::mem::zeroed::<RcLevelsOptimum>() };
    unsafe {
        assert_eq!(rc_optimal_weights(2, 2, 8, 8, 10_001, &mut o), RcStatus::Ok);
        assert_eq!(rc_optimal_weights(1, 2, 8, 8, 100, &mut o), RcStatus::InvalidArgument);
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(rc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/regcomp.h");
    let text = std::fs::read_to_string(header).unwrap();
    for symbol in [
        "rc_model_parse",
        "rc_compliance",
        "rc_last_error",
        "RC_STATUS_OK",
        "typedef struct RcModel RcModel",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ RcModel *m = 0; return rc_model_parse(\"sparse:k=1,n=3\", &m) == RC_STATUS_OK ? 0 : 1; }}\n"
        ),
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}
