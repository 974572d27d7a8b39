//! C ABI for `instab`.
//!
//! Problems are opaque handles created by [`instab_problem_new`] and released
//! with [`instab_problem_free`]. Every fallible call returns an
//! [`InstabStatus`]; on failure a description is available from
//! [`instab_last_error_message`] on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use instab::contfrac::Truncation;
use instab::dispersion::{nu0_estimate, DispersionSpec, Nu0Options, RootOptions};
use instab::eigensystem::{build_w, EigenOptions};
use instab::spectral;
use instab::{Error, FlowParams, GammaStrategy, LatticeVector, ModelKind, PointClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    NoRoot = 4,
    NoConvergence = 5,
    MatchFailure = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstabModel {
    NavierStokes = 0,
    SecondGrade = 1,
    NsAlpha = 2,
    NsVoigt = 3,
}

fn model_from_code(code: i32) -> Option<ModelKind> {
    Some(match code {
        c if c == InstabModel::NavierStokes as i32 => ModelKind::NavierStokes,
        c if c == InstabModel::SecondGrade as i32 => ModelKind::SecondGrade,
        c if c == InstabModel::NsAlpha as i32 => ModelKind::NsAlpha,
        c if c == InstabModel::NsVoigt as i32 => ModelKind::NsVoigt,
        _ => return None,
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstabClass {
    Type0 = 0,
    TypeI0 = 1,
    TypeIPlus = 2,
    TypeIMinus = 3,
    TypeII = 4,
    Parallel = 5,
}

impl From<PointClass> for InstabClass {
    fn from(c: PointClass) -> Self {
        match c {
            PointClass::Type0 => InstabClass::Type0,
            PointClass::TypeI0 => InstabClass::TypeI0,
            PointClass::TypeIPlus => InstabClass::TypeIPlus,
            PointClass::TypeIMinus => InstabClass::TypeIMinus,
            PointClass::TypeII => InstabClass::TypeII,
            PointClass::Parallel => InstabClass::Parallel,
        }
    }
}

/// Result of [`instab_find_root`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InstabRoot {
    pub lambda: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub residual: f64,
    pub cf_depth: usize,
}

/// Opaque problem instance.
pub struct InstabProblem {
    params: FlowParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> InstabStatus {
    match e {
        Error::ZeroWavevector | Error::Parallel { .. } | Error::InvalidParameter(_) => {
            InstabStatus::InvalidArgument
        }
        Error::UnsupportedClass { .. } | Error::UnsupportedModel { .. } | Error::IndexUndefined { .. } => {
            InstabStatus::Unsupported
        }
        Error::NoSignChange { .. } | Error::NotFound { .. } => InstabStatus::NoRoot,
        Error::NoConvergence { .. } => InstabStatus::NoConvergence,
        Error::MatchFailure { .. } => InstabStatus::MatchFailure,
        Error::DivisionByZero { .. } | Error::DegenerateFraction { .. } => InstabStatus::Internal,
    }
}

/// Run `f`, recording errors and converting panics.
fn guard<F>(f: F) -> InstabStatus
where
    F: FnOnce() -> Result<(), (InstabStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InstabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            InstabStatus::Panic
        }
    }
}

fn lib<T>(r: instab::Result<T>) -> Result<T, (InstabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (InstabStatus, String) {
    (InstabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn problem<'a>(p: *const InstabProblem) -> Result<&'a InstabProblem, (InstabStatus, String)> {
    p.as_ref().ok_or_else(|| null("problem"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (InstabStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Create a problem. `model` is an [`InstabModel`] value; `alpha` is ignored
/// for Navier–Stokes. `q` is replaced by its canonical representative.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle that must be
/// released with [`instab_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn instab_problem_new(
    model: i32,
    px: i64,
    py: i64,
    qx: i64,
    qy: i64,
    nu: f64,
    alpha: f64,
    out: *mut *mut InstabProblem,
) -> InstabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let kind = model_from_code(model)
            .ok_or_else(|| (InstabStatus::InvalidArgument, format!("unknown model code {model}")))?;
        let alpha = kind.needs_alpha().then_some(alpha);
        let params = lib(FlowParams::new(
            kind,
            LatticeVector::new(px, py),
            LatticeVector::new(qx, qy),
            nu,
            alpha,
        ))?;
        *out = Box::into_raw(Box::new(InstabProblem { params }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`instab_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn instab_problem_free(p: *mut InstabProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Use an explicit steady-state amplitude instead of the normalized one.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn instab_problem_set_gamma(p: *mut InstabProblem, gamma: f64) -> InstabStatus {
    guard(|| {
        let prob = p.as_mut().ok_or_else(|| null("problem"))?;
        prob.params = lib(prob.params.clone().with_gamma(GammaStrategy::Explicit(gamma)))?;
        Ok(())
    })
}

/// Replace the viscosity.
///
/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn instab_problem_set_nu(p: *mut InstabProblem, nu: f64) -> InstabStatus {
    guard(|| {
        let prob = p.as_mut().ok_or_else(|| null("problem"))?;
        prob.params = lib(prob.params.with_nu(nu))?;
        Ok(())
    })
}

/// Classify the orbit of `q` under shifts by `p`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn instab_classify(px: i64, py: i64, qx: i64, qy: i64, out: *mut InstabClass) -> InstabStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let p = LatticeVector::new(px, py);
        if p.is_zero() {
            return Err((InstabStatus::InvalidArgument, Error::ZeroWavevector.to_string()));
        }
        *out = instab::classify(LatticeVector::new(qx, qy), p).into();
        Ok(())
    })
}

/// Class of the problem's orbit.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_problem_class(p: *const InstabProblem, out: *mut InstabClass) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        *out_ref(out, "out")? = prob.params.class().into();
        Ok(())
    })
}

/// Canonical representative `q̂` stored in the problem.
///
/// # Safety
/// `p` must be a live handle; `qx`, `qy` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_problem_canonical_q(p: *const InstabProblem, qx: *mut i64, qy: *mut i64) -> InstabStatus {
    guard(|| {
        let q = problem(p)?.params.q();
        *out_ref(qx, "qx")? = q.x;
        *out_ref(qy, "qy")? = q.y;
        Ok(())
    })
}

/// Dispersion function at `lambda` with tails evaluated to `tol`.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_dispersion_value(
    p: *const InstabProblem,
    lambda: f64,
    tol: f64,
    out: *mut f64,
) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        let out = out_ref(out, "out")?;
        let spec = lib(DispersionSpec::new(prob.params.clone(), Truncation::adaptive(tol)))?;
        *out = lib(spec.value(lambda))?;
        Ok(())
    })
}

/// Smallest positive root of the dispersion function. `lambda_cap <= 0`
/// selects the default scan range. Returns `NoRoot` if no sign change is found.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_find_root(
    p: *const InstabProblem,
    tol: f64,
    lambda_cap: f64,
    out: *mut InstabRoot,
) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        let out = out_ref(out, "out")?;
        let spec = lib(DispersionSpec::new(prob.params.clone(), Truncation::adaptive(tol)))?;
        let opts = RootOptions {
            lambda_cap: (lambda_cap > 0.0).then_some(lambda_cap),
            ..RootOptions::with_tol(tol)
        };
        let r = lib(spec.find_root(&opts))?;
        *out = InstabRoot {
            lambda: r.lambda,
            bracket_lo: r.bracket.0,
            bracket_hi: r.bracket.1,
            residual: r.dispersion_residual,
            cf_depth: r.cf_depth,
        };
        Ok(())
    })
}

/// Critical viscosity estimate (the problem's own `nu` is ignored).
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_nu0(p: *const InstabProblem, tol: f64, out: *mut f64) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        let out = out_ref(out, "out")?;
        let opts = Nu0Options {
            tol,
            ..Default::default()
        };
        *out = lib(nu0_estimate(&prob.params, &opts))?.nu0;
        Ok(())
    })
}

/// Largest real part of the spectrum of the `(2·window+1)`-section.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_max_real_eig(p: *const InstabProblem, window: usize, out: *mut f64) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        let out = out_ref(out, "out")?;
        *out = lib(spectral::max_real_eig(&prob.params, window))?;
        Ok(())
    })
}

/// `det(I + K_λ)` on the `(2·window+1)`-section.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_det(p: *const InstabProblem, lambda: f64, window: usize, out: *mut f64) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        let out = out_ref(out, "out")?;
        *out = lib(spectral::det_i_plus_k(lambda, &prob.params, window))?.value;
        Ok(())
    })
}

/// Eigenvector `w_{−window..=window}` for a root `lambda`, written to `buf`
/// (which must hold `2·window + 1` doubles). `residual` may be null.
///
/// # Safety
/// `p` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn instab_eigenvector(
    p: *const InstabProblem,
    lambda: f64,
    root_tol: f64,
    window: usize,
    buf: *mut f64,
    len: usize,
    residual: *mut f64,
) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = 2 * window + 1;
        if len < need {
            return Err((
                InstabStatus::BufferTooSmall,
                format!("buffer holds {len} values, {need} required"),
            ));
        }
        let ev = lib(build_w(lambda, &prob.params, window, &EigenOptions::for_root_tol(root_tol)))?;
        std::slice::from_raw_parts_mut(buf, need).copy_from_slice(&ev.w);
        if let Some(r) = residual.as_mut() {
            *r = ev.residual;
        }
        Ok(())
    })
}

/// Growth rate of the truncated dynamics from seeded random data.
/// `dt <= 0` selects the largest stable step.
///
/// # Safety
/// `p` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn instab_growth_rate(
    p: *const InstabProblem,
    window: usize,
    t_final: f64,
    dt: f64,
    seed: u64,
    out: *mut f64,
) -> InstabStatus {
    guard(|| {
        let prob = problem(p)?;
        let out = out_ref(out, "out")?;
        let dt = (dt > 0.0).then_some(dt);
        *out = lib(spectral::growth_rate(&prob.params, window, t_final, dt, seed))?;
        Ok(())
    })
}

/// Message for the last failure on this thread (empty if none). The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn instab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn instab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
