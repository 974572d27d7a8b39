//! Eigenvector reconstruction from a dispersion root.
//!
//! With `z_n = ρ_n w_n` the eigenvalue equation becomes
//! `z_{n−1} − z_{n+1} = a_n z_n`, so the ratios `u_n = z_{n−1}/z_n` obey
//! `u_n = a_n + 1/u_{n+1}`. The decaying solution to the right is
//! `u_n = a_n + [a_{n+1}; a_{n+2}; …]`, to the left
//! `u_n = −[a_{n−1}; a_{n−2}; …]`; they agree at `n = 0` exactly when `λ`
//! solves the dispersion equation. Products of `u_n` are accumulated as
//! log-magnitude and sign.

use serde::{Deserialize, Serialize};

use crate::contfrac::{eval_adaptive, TailSpec, DEFAULT_MAX_DEPTH};
use crate::dispersion::Variant;
use crate::error::{Error, Result};
use crate::models::FlowParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Allowed `|u₀⁽¹⁾ − u₀⁽²⁾|`.
    pub match_tol: f64,
    /// Tolerance for the far tails that seed the recurrences.
    pub tail_tol: f64,
    pub max_depth: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            match_tol: 1e-8,
            tail_tol: 1e-15,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl EigenOptions {
    /// Match tolerance of `100 × root_tol`.
    pub fn for_root_tol(root_tol: f64) -> Self {
        EigenOptions {
            match_tol: 100.0 * root_tol,
            ..Default::default()
        }
    }
}

/// The ratio sequence on `[−N, N]` together with both values at `n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UValues {
    pub n_min: i64,
    /// `u_n` for `n = n_min, …, N`; `NaN` where a side is not built.
    pub values: Vec<f64>,
    pub u0_forward: f64,
    pub u0_backward: f64,
}

impl UValues {
    pub fn get(&self, n: i64) -> Option<f64> {
        let i = usize::try_from(n - self.n_min).ok()?;
        self.values.get(i).copied().filter(|v| !v.is_nan())
    }

    pub fn mismatch(&self) -> f64 {
        (self.u0_forward - self.u0_backward).abs()
    }
}

fn variant_of(params: &FlowParams) -> Result<Variant> {
    Variant::for_class(params.class()).ok_or(Error::UnsupportedClass {
        class: params.class(),
        operation: "eigenvector construction",
    })
}

/// Right ratios `u_1..=u_N` (index `j−1` holds `u_j`).
fn forward_ratios(lambda: f64, params: &FlowParams, n: i64, opts: &EigenOptions) -> Result<Vec<f64>> {
    let seed = eval_adaptive(
        &TailSpec::forward(params, lambda).starting_at(n + 2),
        opts.tail_tol,
        opts.max_depth,
    )?;
    let mut next = params.coeff(n + 1, lambda)? + seed.value;
    let mut out = vec![0.0; n as usize];
    for k in (1..=n).rev() {
        let u = params.coeff(k, lambda)? + 1.0 / next;
        out[(k - 1) as usize] = u;
        next = u;
    }
    Ok(out)
}

/// Left ratios `u_{−N+1}..=u_0` (index `j` holds `u_{−N+1+j}`).
fn backward_ratios(lambda: f64, params: &FlowParams, n: i64, opts: &EigenOptions) -> Result<Vec<f64>> {
    // v_m = [a_{m−1}; a_{m−2}; …], v_{m+1} = 1/(a_m + v_m), u_m = −v_m.
    let seed = eval_adaptive(
        &TailSpec::backward(params, lambda).starting_at(-n - 1),
        opts.tail_tol,
        opts.max_depth,
    )?;
    let mut v = seed.value;
    let mut out = Vec::with_capacity(n as usize);
    for m in (-n + 1)..=0 {
        let d = params.coeff(m - 1, lambda)? + v;
        if d == 0.0 {
            return Err(Error::DegenerateFraction { depth: (-m) as usize });
        }
        v = 1.0 / d;
        out.push(-v);
    }
    Ok(out)
}

/// Ratios `u_n` on `[−N, N]`; fails with `MatchFailure` if `λ` is not a root.
pub fn build_u(lambda: f64, params: &FlowParams, n: usize, opts: &EigenOptions) -> Result<UValues> {
    let variant = variant_of(params)?;
    if n < 1 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let big = n as i64;
    let a0 = params.coeff(0, lambda)?;
    let mut values = vec![f64::NAN; 2 * n + 1];
    let at = |k: i64| (k + big) as usize;

    let u0_forward = if variant.uses_forward() {
        let fwd = forward_ratios(lambda, params, big, opts)?;
        for (j, u) in fwd.iter().enumerate() {
            values[at(j as i64 + 1)] = *u;
        }
        a0 + 1.0 / fwd[0]
    } else {
        a0
    };
    let u0_backward = if variant.uses_backward() {
        let bwd = backward_ratios(lambda, params, big, opts)?;
        for (j, u) in bwd.iter().enumerate() {
            values[at(-big + 1 + j as i64)] = *u;
        }
        bwd[bwd.len() - 1]
    } else {
        0.0
    };
    let out = UValues {
        n_min: -big,
        values,
        u0_forward,
        u0_backward,
    };
    if out.mismatch() > opts.match_tol {
        return Err(Error::MatchFailure {
            forward: u0_forward,
            backward: u0_backward,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Smaller of the two one-sided rates `δ` in `|w_n| ≈ C e^{−δ|n|}`.
    pub rate: f64,
    /// Smaller of the two coefficients of determination.
    pub r_squared: f64,
    pub rate_forward: Option<f64>,
    pub rate_backward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorResult {
    pub lambda: f64,
    pub window: usize,
    pub n_min: i64,
    /// `w_n` for `n = −N, …, N` with `z₀ = 1`; may underflow to zero.
    pub w: Vec<f64>,
    /// `log|w_n|`, `−∞` for structural zeros.
    pub log_abs_w: Vec<f64>,
    /// Sign of `w_n`, kept even where `w_n` underflows.
    pub signs: Vec<i8>,
    pub residual: f64,
    pub decay: Option<DecayFit>,
    pub sign_ok: bool,
    pub u0_forward: f64,
    pub u0_backward: f64,
}

impl EigenvectorResult {
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.w.len()).map(move |i| self.n_min + i as i64)
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        let i = usize::try_from(n - self.n_min).ok()?;
        self.w.get(i).copied()
    }

    pub fn sign(&self, n: i64) -> i8 {
        usize::try_from(n - self.n_min)
            .ok()
            .and_then(|i| self.signs.get(i).copied())
            .unwrap_or(0)
    }

    pub fn decay_rate(&self) -> Option<f64> {
        self.decay.map(|d| d.rate)
    }

    /// `Σ (1 + n^{2s}) |w_n|²` over the window.
    pub fn weighted_norm_sq(&self, s: u32) -> f64 {
        self.indices()
            .zip(&self.log_abs_w)
            .map(|(n, &l)| (1.0 + (n as f64).powi(2 * s as i32)) * (2.0 * l).exp())
            .sum()
    }
}

/// Recurrence defect of an arbitrary window vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    /// The vector is identically zero, so the defect says nothing.
    pub degenerate: bool,
}

impl ResidualReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// `max_n |ρ_{n−1}w_{n−1} − ρ_{n+1}w_{n+1} − (λ + ν d_n) w_n| / max(1, |w_n|)`
/// over the interior `n_min+1 ..= n_max−1`.
pub fn residual(params: &FlowParams, lambda: f64, n_min: i64, w: &[f64]) -> ResidualReport {
    let degenerate = w.iter().all(|&v| v == 0.0);
    let mut max: f64 = 0.0;
    for i in 1..w.len().saturating_sub(1) {
        let n = n_min + i as i64;
        let lhs = params.rho(n - 1) * w[i - 1] - params.rho(n + 1) * w[i + 1]
            - (lambda + params.nu() * params.viscous_weight(n)) * w[i];
        max = max.max(lhs.abs() / w[i].abs().max(1.0));
    }
    ResidualReport { max, degenerate }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let m = xs.len();
    if m < 3 {
        return None;
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}

/// One-sided least-squares fits of `log|w_n|` against `|n|` over
/// `|n| ∈ [N/4, 3N/4]`.
pub fn fit_decay(n_min: i64, window: usize, log_abs_w: &[f64]) -> Option<DecayFit> {
    let lo = (window / 4) as i64;
    let hi = (3 * window / 4) as i64;
    let side = |sign: i64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
            .filter_map(|k| {
                let i = usize::try_from(sign * k - n_min).ok()?;
                let l = *log_abs_w.get(i)?;
                l.is_finite().then_some((k as f64, l))
            })
            .unzip();
        least_squares(&xs, &ys)
    };
    let fwd = side(1);
    let bwd = side(-1);
    let fits: Vec<(f64, f64)> = fwd.iter().chain(bwd.iter()).copied().collect();
    if fits.is_empty() {
        return None;
    }
    Some(DecayFit {
        rate: fits.iter().map(|f| -f.0).fold(f64::INFINITY, f64::min),
        r_squared: fits.iter().map(|f| f.1).fold(f64::INFINITY, f64::min),
        rate_forward: fwd.map(|f| -f.0),
        rate_backward: bwd.map(|f| -f.0),
    })
}

/// Expected sign of `w_n` (up to a global flip): positive for `n > 0`,
/// negative at `n = 0, −1`, alternating below. Structural zeros are `0`.
pub fn expected_sign(variant: Variant, n: i64) -> i8 {
    match variant {
        Variant::BackwardOnly if n > 1 => return 0,
        Variant::ForwardOnly if n < -1 => return 0,
        _ => {}
    }
    if n > 0 {
        1
    } else if n >= -1 {
        -1
    } else if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Eigenvector on `[−N, N]` normalized by `z₀ = 1`.
pub fn build_w(lambda: f64, params: &FlowParams, n: usize, opts: &EigenOptions) -> Result<EigenvectorResult> {
    let variant = variant_of(params)?;
    let u = build_u(lambda, params, n, opts)?;
    let big = n as i64;
    let len = 2 * n + 1;
    let at = |k: i64| (k + big) as usize;
    // log|z_n| and sign(z_n).
    let mut log_z = vec![f64::NEG_INFINITY; len];
    let mut sign_z = vec![0i8; len];
    log_z[at(0)] = 0.0;
    sign_z[at(0)] = 1;

    let sgn = |x: f64| if x < 0.0 { -1i8 } else { 1i8 };
    if variant.uses_forward() {
        for k in 1..=big {
            let uk = u.get(k).expect("forward ratios built");
            log_z[at(k)] = log_z[at(k - 1)] - uk.abs().ln();
            sign_z[at(k)] = sign_z[at(k - 1)] * sgn(uk);
        }
    }
    if variant.uses_backward() {
        for k in 1..=big {
            let uk = u.get(-k + 1).expect("backward ratios built");
            log_z[at(-k)] = log_z[at(-k + 1)] + uk.abs().ln();
            sign_z[at(-k)] = sign_z[at(-k + 1)] * sgn(uk);
        }
    }

    let mut log_w = vec![f64::NEG_INFINITY; len];
    let mut sign_w = vec![0i8; len];
    for k in -big..=big {
        let i = at(k);
        let rho = params.rho(k);
        if sign_z[i] != 0 && rho != 0.0 {
            log_w[i] = log_z[i] - rho.abs().ln();
            sign_w[i] = sign_z[i] * sgn(rho);
        }
    }
    // The index where ρ vanishes carries w through its own equation.
    let special = match variant {
        Variant::BackwardOnly => Some((1i64, 1.0)),
        Variant::ForwardOnly => Some((-1, -1.0)),
        Variant::Both => None,
    };
    if let Some((k, s)) = special {
        if k.unsigned_abs() as usize <= n {
            let v = s / (lambda + params.nu() * params.viscous_weight(k));
            log_w[at(k)] = v.abs().ln();
            sign_w[at(k)] = sgn(v);
        }
    }

    let w: Vec<f64> = log_w
        .iter()
        .zip(&sign_w)
        .map(|(&l, &s)| f64::from(s) * l.exp())
        .collect();
    let res = residual(params, lambda, -big, &w);
    let decay = fit_decay(-big, n, &log_w);
    let flip = sign_w[at(0)] * expected_sign(variant, 0);
    let sign_ok = (-big..=big).all(|k| sign_w[at(k)] == flip * expected_sign(variant, k));

    Ok(EigenvectorResult {
        lambda,
        window: n,
        n_min: -big,
        w,
        log_abs_w: log_w,
        signs: sign_w,
        residual: res.max,
        decay,
        sign_ok,
        u0_forward: u.u0_forward,
        u0_backward: u.u0_backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::Truncation;
    use crate::dispersion::{DispersionSpec, RootOptions};
    use crate::lattice::LatticeVector;
    use crate::models::ModelKind;

    const P: LatticeVector = LatticeVector::new(3, 1);
    const Q0: LatticeVector = LatticeVector::new(-1, 2);
    const QPLUS: LatticeVector = LatticeVector::new(0, -2);
    const QMINUS: LatticeVector = LatticeVector::new(2, -2);
    const ROOT_TOL: f64 = 1e-13;

    fn rooted(model: ModelKind, q: LatticeVector, nu: f64) -> (FlowParams, f64) {
        let params = FlowParams::new(model, P, q, nu, Some(0.5)).unwrap();
        let spec = DispersionSpec::new(params.clone(), Truncation::adaptive(ROOT_TOL)).unwrap();
        let lambda = spec.find_root(&RootOptions::with_tol(ROOT_TOL)).unwrap().lambda;
        (params, lambda)
    }

    fn opts() -> EigenOptions {
        EigenOptions::for_root_tol(ROOT_TOL)
    }

    #[test]
    fn u_signs_and_limits() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let u = build_u(lambda, &params, 40, &opts()).unwrap();
        assert!((1..=40).all(|n| u.get(n).unwrap() > 0.0));
        assert!((-39..=0).all(|n| u.get(n).unwrap() < 0.0));
        assert!(u.get(40).unwrap() > u.get(20).unwrap() && u.get(20).unwrap() > 100.0);
        assert!(u.get(-39).unwrap().abs() < 1e-2);
        assert!(u.mismatch() <= 100.0 * ROOT_TOL);
    }

    #[test]
    fn non_root_is_rejected() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let o = opts();
        let off = lambda + 10.0 * o.match_tol;
        assert!(matches!(
            build_u(off, &params, 32, &o),
            Err(Error::MatchFailure { .. })
        ));
        assert!(matches!(
            build_w(off, &params, 32, &o),
            Err(Error::MatchFailure { .. })
        ));
    }

    #[test]
    fn certified_vectors_for_every_model_and_class() {
        for m in ModelKind::ALL {
            for q in [Q0, QPLUS, QMINUS] {
                let (params, lambda) = rooted(m, q, 0.01);
                let r = build_w(lambda, &params, 64, &opts()).unwrap();
                assert!(r.residual <= 1e-10, "{m} {q}: residual {}", r.residual);
                assert!(r.sign_ok, "{m} {q}: signs {:?}", r.signs);
                assert!(r.decay_rate().unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn type_i0_sign_pattern() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let r = build_w(lambda, &params, 32, &opts()).unwrap();
        let flip = r.sign(1);
        assert!((1..=32).all(|n| r.sign(n) == flip));
        assert_eq!(r.sign(0), -flip);
        assert_eq!(r.sign(-1), -flip);
        assert!((2..=32).all(|k| r.sign(-k) == flip * if k % 2 == 0 { 1 } else { -1 }));
    }

    #[test]
    fn type_i_plus_truncates_right_side() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, QPLUS, 0.01);
        let r = build_w(lambda, &params, 32, &opts()).unwrap();
        assert!((2..=32).all(|n| r.get(n).unwrap() == 0.0));
        assert!(r.get(1).unwrap() > 0.0);
        assert!(r.sign_ok);
    }

    #[test]
    fn type_i_minus_truncates_left_side() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, QMINUS, 0.01);
        let r = build_w(lambda, &params, 32, &opts()).unwrap();
        assert!((2..=32).all(|n| r.get(-n).unwrap() == 0.0));
        assert!(r.get(-1).unwrap() < 0.0);
        assert!(r.sign_ok);
    }

    #[test]
    fn residual_detects_wrong_lambda() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let r = build_w(lambda, &params, 32, &opts()).unwrap();
        let off = residual(&params, lambda + 1e-3, r.n_min, &r.w);
        assert!(off.max > 1e-5 && !off.is_degenerate());
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let params = FlowParams::new(ModelKind::NavierStokes, P, Q0, 0.06, None).unwrap();
        let rep = residual(&params, 0.3, -4, &[0.0; 9]);
        assert_eq!(rep.max, 0.0);
        assert!(rep.is_degenerate());
    }

    #[test]
    fn residual_stable_in_window() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let tol = 1e-10;
        let mut prev = f64::INFINITY;
        for n in [32, 64, 128] {
            let r = build_w(lambda, &params, n, &opts()).unwrap();
            assert!(r.residual <= prev || r.residual <= tol);
            prev = r.residual;
        }
    }

    #[test]
    fn weighted_norms_converge() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let small = build_w(lambda, &params, 64, &opts()).unwrap();
        let large = build_w(lambda, &params, 128, &opts()).unwrap();
        for s in 0..=2 {
            let (a, b) = (small.weighted_norm_sq(s), large.weighted_norm_sq(s));
            assert!(a.is_finite() && (a - b).abs() <= 1e-12 * b, "s={s}");
        }
    }

    #[test]
    fn large_window_stays_finite() {
        let (params, lambda) = rooted(ModelKind::NavierStokes, Q0, 0.06);
        let r = build_w(lambda, &params, 1024, &opts()).unwrap();
        assert!(r.log_abs_w.iter().all(|l| l.is_finite()));
        assert!(r.sign_ok);
        let fit = r.decay.unwrap();
        assert!(fit.rate > 0.0 && fit.r_squared >= 0.999, "{fit:?}");
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let n = 40usize;
        let logs: Vec<f64> = (-(n as i64)..=n as i64).map(|k| 2.0 - 0.7 * k.abs() as f64).collect();
        let fit = fit_decay(-(n as i64), n, &logs).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsupported_classes() {
        let params = FlowParams::new(ModelKind::NavierStokes, P, LatticeVector::new(-1, 1), 0.06, None).unwrap();
        assert!(matches!(
            build_w(0.1, &params, 8, &opts()),
            Err(Error::UnsupportedClass { .. })
        ));
    }
}
