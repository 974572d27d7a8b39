//! Independent checks on dispersion roots: finite sections of the restricted
//! operator, the perturbation determinant `det(I + K_λ)` and a time-stepping
//! growth-rate estimate.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::FlowParams;

/// Largest window `N` accepted by the dense eigensolver.
pub const DENSE_CAP: usize = 512;

/// The `(2N+1)`-square central section of the operator, indices `−N..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedOperator {
    pub window: usize,
    /// `−ν d_n`.
    pub diag: Vec<f64>,
    /// Entry `(n, n−1) = ρ_{n−1}`; `sub[0]` is unused and zero.
    pub sub: Vec<f64>,
    /// Entry `(n, n+1) = −ρ_{n+1}`; the last element is unused and zero.
    pub sup: Vec<f64>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn n_min(&self) -> i64 {
        -(self.window as i64)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut a = DMatrix::zeros(m, m);
        for i in 0..m {
            a[(i, i)] = self.diag[i];
            if i > 0 {
                a[(i, i - 1)] = self.sub[i];
            }
            if i + 1 < m {
                a[(i, i + 1)] = self.sup[i];
            }
        }
        a
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.dim();
        for i in 0..m {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.sub[i] * x[i - 1];
            }
            if i + 1 < m {
                s += self.sup[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    /// All eigenvalues as `(re, im)` pairs via a dense real Schur form.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        self.to_dense()
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect()
    }
}

pub fn build_l(params: &FlowParams, n: usize) -> Result<TruncatedOperator> {
    if n < 1 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let big = n as i64;
    let mut diag = Vec::with_capacity(2 * n + 1);
    let mut sub = Vec::with_capacity(2 * n + 1);
    let mut sup = Vec::with_capacity(2 * n + 1);
    for k in -big..=big {
        diag.push(params.diagonal(k));
        sub.push(if k > -big { params.rho(k - 1) } else { 0.0 });
        sup.push(if k < big { -params.rho(k + 1) } else { 0.0 });
    }
    Ok(TruncatedOperator {
        window: n,
        diag,
        sub,
        sup,
    })
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::InvalidParameter(format!(
            "window {n} exceeds the dense cap {DENSE_CAP}"
        )));
    }
    Ok(())
}

/// Largest real part over the spectrum of the `N`-section.
pub fn max_real_eig(params: &FlowParams, n: usize) -> Result<f64> {
    check_dense(n)?;
    let op = build_l(params, n)?;
    Ok(op
        .eigenvalues()
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// [`max_real_eig`] with `N` doubled from `n_start` until two consecutive
/// windows agree to `tol`. Returns the value and the larger window.
pub fn max_real_eig_converged(params: &FlowParams, n_start: usize, tol: f64, cap: usize) -> Result<(f64, usize)> {
    let cap = cap.min(DENSE_CAP);
    let mut n = n_start.max(1);
    let mut prev = max_real_eig(params, n)?;
    loop {
        if n >= cap {
            return Err(Error::NoConvergence {
                what: "finite-section eigenvalue",
                limit: cap,
                gap: f64::NAN,
            });
        }
        let next_n = (2 * n).min(cap);
        let next = max_real_eig(params, next_n)?;
        let gap = (next - prev).abs();
        if gap <= tol * next.abs().max(1.0) {
            return Ok((next, next_n));
        }
        if next_n >= cap {
            return Err(Error::NoConvergence {
                what: "finite-section eigenvalue",
                limit: cap,
                gap,
            });
        }
        prev = next;
        n = next_n;
    }
}

/// Eigenvector of the `N`-section for a (real) eigenvalue estimate, by inverse
/// iteration; unit Euclidean norm, sign fixed so the entry at `n = 1` is
/// non-negative.
pub fn eigenvector_near(params: &FlowParams, n: usize, lambda: f64) -> Result<Vec<f64>> {
    check_dense(n)?;
    let op = build_l(params, n)?;
    let m = op.dim();
    let shift = lambda + 1e-9 * lambda.abs().max(1.0);
    let a = op.to_dense() - DMatrix::identity(m, m) * shift;
    let lu = a.lu();
    let mut x = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    for _ in 0..4 {
        let y = lu
            .solve(&x)
            .ok_or_else(|| Error::InvalidParameter("shifted section is singular".into()))?;
        let norm = y.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter("inverse iteration broke down".into()));
        }
        x = y / norm;
    }
    let pivot = x[n + 1];
    if pivot < 0.0 {
        x = -x;
    }
    Ok(x.iter().copied().collect())
}

/// Dominant finite-section eigenvalue together with its eigenvector.
pub fn dominant_eigenpair(params: &FlowParams, n: usize) -> Result<(f64, Vec<f64>)> {
    let lambda = max_real_eig(params, n)?;
    Ok((lambda, eigenvector_near(params, n, lambda)?))
}

/// `|⟨a, b⟩| / (‖a‖‖b‖)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot.abs() / (na * nb)
}

/// `K_λ = D_λ⁻¹ B`: the off-diagonal part of the section scaled row-wise by
/// `k_n = 1/(−ν d_n − λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMatrix {
    pub window: usize,
    pub lambda: f64,
    pub k: Vec<f64>,
    /// `(n, n−1)` entry `k_n ρ_{n−1}`.
    pub sub: Vec<f64>,
    /// `(n, n+1)` entry `−k_n ρ_{n+1}`.
    pub sup: Vec<f64>,
}

pub fn build_k(params: &FlowParams, lambda: f64, n: usize) -> Result<KMatrix> {
    let op = build_l(params, n)?;
    let mut k = Vec::with_capacity(op.dim());
    for (i, &d) in op.diag.iter().enumerate() {
        let den = d - lambda;
        if den == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} hits the diagonal at n = {}",
                op.n_min() + i as i64
            )));
        }
        k.push(1.0 / den);
    }
    let sub = op.sub.iter().zip(&k).map(|(s, kn)| s * kn).collect();
    let sup = op.sup.iter().zip(&k).map(|(s, kn)| s * kn).collect();
    Ok(KMatrix {
        window: n,
        lambda,
        k,
        sub,
        sup,
    })
}

impl KMatrix {
    /// `det(I + K)` by the continuant recurrence, rescaled against overflow.
    pub fn det_identity_plus(&self) -> f64 {
        let (mut d_prev, mut d) = (1.0_f64, 1.0_f64);
        let mut log_scale = 0.0_f64;
        for m in 1..self.k.len() {
            let next = d - self.sub[m] * self.sup[m - 1] * d_prev;
            d_prev = d;
            d = next;
            let mag = d.abs().max(d_prev.abs());
            if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
                d /= mag;
                d_prev /= mag;
                log_scale += mag.ln();
            }
        }
        d * log_scale.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantSample {
    pub lambda: f64,
    pub value: f64,
    pub window: usize,
}

/// Perturbation determinant `det(I + K_λ)` of the `N`-section. `N = 0` is the
/// single index `n = 0`.
pub fn det_i_plus_k(lambda: f64, params: &FlowParams, n: usize) -> Result<DeterminantSample> {
    let value = if n == 0 {
        if params.diagonal(0) == lambda {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} hits the diagonal at n = 0"
            )));
        }
        1.0
    } else {
        build_k(params, lambda, n)?.det_identity_plus()
    };
    Ok(DeterminantSample {
        lambda,
        value,
        window: n,
    })
}

/// Zero of `λ ↦ det(I + K_λ)` on `bracket` by bisection to width `tol`.
pub fn det_root(params: &FlowParams, n: usize, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi && tol > 0.0) {
        return Err(Error::InvalidParameter(
            "det_root needs lo < hi and tol > 0".into(),
        ));
    }
    let f = |x: f64| det_i_plus_k(x, params, n).map(|s| s.value);
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange {
            what: "perturbation determinant",
            lower: lo,
            upper: hi,
        });
    }
    let lo_sign = flo.signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest stable step for the explicit integrator on this section.
pub fn max_stable_dt(op: &TruncatedOperator) -> f64 {
    let dmax = op.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    1.0 / (4.0 * dmax + 4.0)
}

/// Growth rate from random initial data drawn with `seed`.
pub fn growth_rate(params: &FlowParams, n: usize, t_final: f64, dt: Option<f64>, seed: u64) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let w0: Vec<f64> = (0..2 * n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    growth_rate_with_initial(params, n, t_final, dt, &w0)
}

/// Integrate `dw/dt = L_N w` with classical RK4, renormalizing each step, and
/// return the least-squares slope of `log‖w(t)‖` over `[t_final/2, t_final]`.
pub fn growth_rate_with_initial(
    params: &FlowParams,
    n: usize,
    t_final: f64,
    dt: Option<f64>,
    w0: &[f64],
) -> Result<f64> {
    let op = build_l(params, n)?;
    let m = op.dim();
    if w0.len() != m {
        return Err(Error::InvalidParameter(format!(
            "initial data has length {}, expected {m}",
            w0.len()
        )));
    }
    let norm0 = w0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm0 > 0.0 && norm0.is_finite()) {
        return Err(Error::InvalidParameter("initial data must be non-zero".into()));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter("t_final must be positive".into()));
    }
    let dt_max = max_stable_dt(&op);
    let dt = match dt {
        Some(h) if h > 0.0 && h <= dt_max => h,
        Some(h) => {
            return Err(Error::InvalidParameter(format!(
                "dt = {h} outside (0, {dt_max:e}]"
            )))
        }
        None => dt_max,
    };
    let steps = (t_final / dt).ceil() as usize;
    let dt = t_final / steps as f64;

    let mut w: Vec<f64> = w0.iter().map(|x| x / norm0).collect();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut log_norm = 0.0_f64;
    let half = steps / 2;
    let (mut ts, mut ls) = (Vec::with_capacity(steps - half + 1), Vec::with_capacity(steps - half + 1));
    for step in 1..=steps {
        op.apply(&w, &mut k1);
        for i in 0..m {
            tmp[i] = w[i] + 0.5 * dt * k1[i];
        }
        op.apply(&tmp, &mut k2);
        for i in 0..m {
            tmp[i] = w[i] + 0.5 * dt * k2[i];
        }
        op.apply(&tmp, &mut k3);
        for i in 0..m {
            tmp[i] = w[i] + dt * k3[i];
        }
        op.apply(&tmp, &mut k4);
        for i in 0..m {
            w[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NoConvergence {
                what: "growth-rate integration",
                limit: step,
                gap: norm,
            });
        }
        log_norm += norm.ln();
        w.iter_mut().for_each(|x| *x /= norm);
        if step >= half {
            ts.push(step as f64 * dt);
            ls.push(log_norm);
        }
    }
    let k = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / k;
    let ml = ls.iter().sum::<f64>() / k;
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(&ls).map(|(t, l)| (t - mt) * (l - ml)).sum();
    Ok(sxy / sxx)
}
