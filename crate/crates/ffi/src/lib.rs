//! C ABI over `regcomp`.
//!
//! Every fallible function returns an [`RcStatus`] and writes results through
//! out-pointers. On failure, [`rc_last_error`] gives a message for the calling
//! thread. Objects are opaque handles released with their `_free` function.
//! Points are passed as flat `double` arrays: `n` entries for vector models,
//! `n * n` row-major entries of a symmetric matrix for `lowrank` models.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use regcomp::compliance::{compliance_report, EstimatorSettings};
use regcomp::levels::optimal_weights;
use regcomp::regularizers::{in_descent_cone, parse_regularizer};
use regcomp::{ComplianceReport, Error, ModelSet, Point, Regularizer, SymMatrix};

/// Status codes; `RC_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    DimensionMismatch = 3,
    InvalidModel = 4,
    InvalidRegularizer = 5,
    InvalidArgument = 6,
    Incompatible = 7,
    Unsupported = 8,
    TooLarge = 9,
    Undefined = 10,
    Numerical = 11,
    Panic = 12,
}

impl From<&Error> for RcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => RcStatus::DimensionMismatch,
            Error::InvalidModel(_) => RcStatus::InvalidModel,
            Error::InvalidRegularizer(_) => RcStatus::InvalidRegularizer,
            Error::InvalidArgument(_) => RcStatus::InvalidArgument,
            Error::Incompatible(_) => RcStatus::Incompatible,
            Error::Unsupported(_) => RcStatus::Unsupported,
            Error::TooLarge(_) => RcStatus::TooLarge,
            Error::Undefined(_) => RcStatus::Undefined,
            Error::Numerical(_) => RcStatus::Numerical,
        }
    }
}

/// A model set.
pub struct RcModel(ModelSet);

/// A regularizer paired with the model it was parsed for.
pub struct RcRegularizer(Regularizer);

/// A compliance report.
pub struct RcReport(ComplianceReport);

/// Scalar fields of a compliance report; absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcReportValues {
    pub delta_nec: f64,
    pub delta_suff: f64,
    /// May be +infinity.
    pub gamma_nec: f64,
    pub b_value: f64,
    pub d_value: f64,
}

/// Optimal two-level weights.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcLevelsOptimum {
    pub nu1_star: f64,
    /// `w2 / w1`.
    pub ratio: f64,
    pub b_value: f64,
    pub delta_nec: f64,
    pub delta_nec_reference: f64,
    pub c1: f64,
    pub c2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

struct Failure(RcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(RcStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, recording failures and converting panics into `Panic`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            RcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("panic: {msg}"));
            RcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn point_arg(model: &ModelSet, data: *const f64, len: usize) -> Result<Point, Failure> {
    if data.is_null() {
        return Err(null("point"));
    }
    let values = std::slice::from_raw_parts(data, len);
    let side = model.side();
    if model.is_matrix() {
        if len != side * side {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", side * side),
                found: format!("{len} entries"),
            }
            .into());
        }
        Ok(Point::SymMatrix(SymMatrix::from_dense(side, values)?))
    } else {
        Ok(Point::Vector(values.to_vec()))
    }
}

/// Message of the last failure on this thread; empty after a success. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses `sparse:k=..,n=..`, `lowrank:r=..,n=..` or
/// `levels:k1=..,k2=..,n1=..,n2=..`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_model_parse(spec: *const c_char, out: *mut *mut RcModel) -> RcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let model: ModelSet = str_arg(spec, "spec")?.parse()?;
        *out = Box::into_raw(Box::new(RcModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `rc_model_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_model_free(model: *mut RcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of `double`s in a point of the model.
///
/// # Safety
/// `model` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn rc_model_point_len(model: *const RcModel) -> usize {
    match model.as_ref() {
        Some(RcModel(m)) if m.is_matrix() => m.side() * m.side(),
        Some(RcModel(m)) => m.side(),
        None => 0,
    }
}

/// Orthogonal projection of `z` onto the model set, written to `out`
/// (same length as `z`).
///
/// # Safety
/// `z` and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_model_project(model: *const RcModel, z: *const f64, len: usize, out: *mut f64) -> RcStatus {
    guard(|| {
        let RcModel(m) = handle(model, "model")?;
        let z = point_arg(m, z, len)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = m.project(&z)?;
        let flat = match &p {
            Point::Vector(v) => v.clone(),
            Point::SymMatrix(s) => s.to_dense(),
        };
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&flat);
        Ok(())
    })
}

/// Gauge of `z` for the convex hull of unit-norm model elements.
///
/// # Safety
/// `z` must point to `len` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_model_norm(model: *const RcModel, z: *const f64, len: usize, out: *mut f64) -> RcStatus {
    guard(|| {
        let RcModel(m) = handle(model, "model")?;
        let out = out_arg(out, "out")?;
        *out = m.norm(&point_arg(m, z, len)?)?;
        Ok(())
    })
}

/// Parses `l1`, `nuclear`, `wl1:w1,w2,..`, `levels:w1=..,w2=..` or inline
/// JSON for `model`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `model` a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_regularizer_parse(
    spec: *const c_char,
    model: *const RcModel,
    out: *mut *mut RcRegularizer,
) -> RcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let RcModel(m) = handle(model, "model")?;
        let reg = parse_regularizer(str_arg(spec, "spec")?, m)?;
        *out = Box::into_raw(Box::new(RcRegularizer(reg)));
        Ok(())
    })
}

/// # Safety
/// `reg` must come from `rc_regularizer_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_regularizer_free(reg: *mut RcRegularizer) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

/// Value of the regularizer at `x`.
///
/// # Safety
/// `x` must point to `len` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_regularizer_eval(
    reg: *const RcRegularizer,
    model: *const RcModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> RcStatus {
    guard(|| {
        let RcRegularizer(r) = handle(reg, "reg")?;
        let RcModel(m) = handle(model, "model")?;
        let out = out_arg(out, "out")?;
        *out = r.evaluate(&point_arg(m, x, len)?)?;
        Ok(())
    })
}

/// Whether `z` lies in the descent cone of `reg` at the model set. Finite
/// atomic norms answer `true` only with a verified witness.
///
/// # Safety
/// `z` must point to `len` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_in_descent_cone(
    reg: *const RcRegularizer,
    model: *const RcModel,
    z: *const f64,
    len: usize,
    out: *mut bool,
) -> RcStatus {
    guard(|| {
        let RcRegularizer(r) = handle(reg, "reg")?;
        let RcModel(m) = handle(model, "model")?;
        let out = out_arg(out, "out")?;
        *out = in_descent_cone(r, m, &point_arg(m, z, len)?)?;
        Ok(())
    })
}

/// Compliance report; `samples` and `seed` drive the sampled estimator used
/// when no closed form applies, `workers = 0` uses all cores.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_compliance(
    model: *const RcModel,
    reg: *const RcRegularizer,
    samples: u64,
    seed: u64,
    workers: usize,
    out: *mut *mut RcReport,
) -> RcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let RcModel(m) = handle(model, "model")?;
        let RcRegularizer(r) = handle(reg, "reg")?;
        let settings = EstimatorSettings {
            samples,
            seed,
            workers,
            ..EstimatorSettings::default()
        };
        *out = Box::into_raw(Box::new(RcReport(compliance_report(m, r, &settings)?)));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_report_values(report: *const RcReport, out: *mut RcReportValues) -> RcStatus {
    guard(|| {
        let RcReport(r) = handle(report, "report")?;
        let out = out_arg(out, "out")?;
        *out = RcReportValues {
            delta_nec: r.delta_nec,
            delta_suff: r.delta_suff.unwrap_or(f64::NAN),
            gamma_nec: r.gamma_nec,
            b_value: r.b_value,
            d_value: r.d_value.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// The full report as JSON, freed with `rc_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_report_json(report: *const RcReport, out: *mut *mut c_char) -> RcStatus {
    guard(|| {
        let RcReport(r) = handle(report, "report")?;
        let out = out_arg(out, "out")?;
        let text = serde_json::to_string(r).map_err(|e| Failure(RcStatus::Numerical, e.to_string()))?;
        *out = CString::new(text)
            .map_err(|e| Failure(RcStatus::Numerical, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must come from `rc_compliance` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_report_free(report: *mut RcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Optimal two-level weights by grid search over the first-level share.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_optimal_weights(
    k1: usize,
    k2: usize,
    n1: usize,
    n2: usize,
    grid: usize,
    out: *mut RcLevelsOptimum,
) -> RcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let o = optimal_weights(k1, k2, n1, n2, grid)?;
        *out = RcLevelsOptimum {
            nu1_star: o.nu1_star,
            ratio: o.ratio,
            b_value: o.b_value,
            delta_nec: o.delta_nec,
            delta_nec_reference: o.delta_nec_reference,
            c1: o.c1,
            c2: o.c2,
        };
        Ok(())
    })
}
