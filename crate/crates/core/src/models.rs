//! Coefficient families of the four vorticity models.
//!
//! For a canonical representative `q` of a non-trivial orbit the restricted
//! linear operator acts on `(w_n)` as
//!
//! ```text
//! (L w)_n = ρ_{n-1} w_{n-1} − ρ_{n+1} w_{n+1} − ν·d_n·w_n
//! ```
//!
//! with `c_n = ‖q + n p‖²`, a model-dependent viscous weight `d_n` (`c_n` or
//! `c_n / (1 + α² c_n)`) and the interaction sequence `ρ_n`. The
//! continued-fraction coefficients are `(λ + ν d_n) / ρ_n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{canonical_rep, classify, wedge, LatticeVector, PointClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    NavierStokes,
    SecondGrade,
    NsAlpha,
    NsVoigt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::NavierStokes,
        ModelKind::SecondGrade,
        ModelKind::NsAlpha,
        ModelKind::NsVoigt,
    ];

    pub fn needs_alpha(self) -> bool {
        self != ModelKind::NavierStokes
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::NavierStokes => "ns",
            ModelKind::SecondGrade => "second-grade",
            ModelKind::NsAlpha => "ns-alpha",
            ModelKind::NsVoigt => "ns-voigt",
        }
    }

    /// Whether the viscous term is smoothed by `(1 + α² c_n)⁻¹`.
    fn smoothed_viscosity(self) -> bool {
        matches!(self, ModelKind::SecondGrade | ModelKind::NsVoigt)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ns" | "navier-stokes" | "navierstokes" => Ok(ModelKind::NavierStokes),
            "sg" | "second-grade" | "secondgrade" => Ok(ModelKind::SecondGrade),
            "nsa" | "ns-alpha" | "nsalpha" => Ok(ModelKind::NsAlpha),
            "voigt" | "nsv" | "ns-voigt" | "nsvoigt" => Ok(ModelKind::NsVoigt),
            other => Err(format!(
                "unknown model `{other}` (expected ns, sg, nsa or voigt)"
            )),
        }
    }
}

/// How the steady-state amplitude `Γ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaStrategy {
    /// `Γ` such that the leading prefactor of `ρ_n` equals one.
    Normalized,
    Explicit(f64),
}

/// Amplitudes of the steady state `ω⁰ = Γ cos(p·x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub vorticity_amplitude: f64,
    /// Amplitude of the body force `f` (in units where the force enters as `ν f`).
    pub forcing_amplitude: f64,
    /// Amplitude of the (filtered) stream function.
    pub stream_amplitude: f64,
}

/// Interaction coefficient `β(p, k)` of the model's Fourier form.
///
/// Zero when either argument is zero. `alpha` is ignored for Navier–Stokes.
pub fn beta(p: LatticeVector, k: LatticeVector, model: ModelKind, alpha: f64) -> f64 {
    if p.is_zero() || k.is_zero() {
        return 0.0;
    }
    let pp = p.norm_sq() as f64;
    let kk = k.norm_sq() as f64;
    let w = wedge(p, k) as f64;
    let a2 = alpha * alpha;
    match model {
        ModelKind::NavierStokes => 0.5 * (1.0 / kk - 1.0 / pp) * w,
        ModelKind::SecondGrade | ModelKind::NsAlpha => {
            0.5 * (1.0 / (kk * (1.0 + a2 * kk)) - 1.0 / (pp * (1.0 + a2 * pp))) * w
        }
        ModelKind::NsVoigt => {
            0.5 * (1.0 / kk - 1.0 / pp) * w / ((1.0 + a2 * pp) * (1.0 + a2 * kk))
        }
    }
}

/// A fully specified problem instance: model, wavevectors and parameters.
///
/// `q` is stored as the canonical representative of its orbit, so index
/// `n = 0` always refers to the minimal-norm point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    model: ModelKind,
    p: LatticeVector,
    q: LatticeVector,
    shift: i64,
    nu: f64,
    alpha: f64,
    gamma: GammaStrategy,
    class: PointClass,
    scale: f64,
}

impl FlowParams {
    /// Build an instance with the normalized `Γ`.
    ///
    /// `alpha` is required (and must be positive) for the three regularized
    /// models; it is ignored for Navier–Stokes.
    pub fn new(
        model: ModelKind,
        p: LatticeVector,
        q: LatticeVector,
        nu: f64,
        alpha: Option<f64>,
    ) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroWavevector);
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be finite and non-negative, got {nu}"
            )));
        }
        let alpha = if model.needs_alpha() {
            match alpha {
                Some(a) if a.is_finite() && a > 0.0 => a,
                Some(a) => {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be positive for {model}, got {a}"
                    )))
                }
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "model {model} requires alpha"
                    )))
                }
            }
        } else {
            0.0
        };
        let orbit = canonical_rep(q, p);
        let mut params = FlowParams {
            model,
            p,
            q: orbit.rep,
            shift: orbit.shift,
            nu,
            alpha,
            gamma: GammaStrategy::Normalized,
            class: classify(orbit.rep, p),
            scale: 0.0,
        };
        params.scale = params.compute_scale();
        Ok(params)
    }

    pub fn with_gamma(mut self, gamma: GammaStrategy) -> Result<Self> {
        if let GammaStrategy::Explicit(g) = gamma {
            if !g.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "explicit Gamma must be finite, got {g}"
                )));
            }
        }
        self.gamma = gamma;
        self.scale = self.compute_scale();
        Ok(self)
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be finite and non-negative, got {nu}"
            )));
        }
        let mut out = self.clone();
        out.nu = nu;
        Ok(out)
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn p(&self) -> LatticeVector {
        self.p
    }

    /// Canonical representative.
    pub fn q(&self) -> LatticeVector {
        self.q
    }

    /// `n` such that the canonical `q̂` equals the user-supplied `q + n p`.
    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `0.0` for Navier–Stokes.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma_strategy(&self) -> GammaStrategy {
        self.gamma
    }

    pub fn class(&self) -> PointClass {
        self.class
    }

    /// Leading prefactor of `ρ_n` (exactly `1` when normalized, `0` for
    /// parallel orbits).
    pub fn rho_scale(&self) -> f64 {
        self.scale
    }

    /// `2‖p‖²` for Navier–Stokes, `2‖p‖²(1 + α²‖p‖²)` otherwise.
    fn normalizer(&self) -> f64 {
        let pp = self.p.norm_sq() as f64;
        match self.model {
            ModelKind::NavierStokes => 2.0 * pp,
            _ => 2.0 * pp * (1.0 + self.alpha * self.alpha * pp),
        }
    }

    fn compute_scale(&self) -> f64 {
        let qp = wedge(self.q, self.p);
        if qp == 0 {
            return 0.0;
        }
        match self.gamma {
            GammaStrategy::Normalized => 1.0,
            GammaStrategy::Explicit(g) => g * qp as f64 / self.normalizer(),
        }
    }

    /// Steady-state amplitude `Γ`.
    pub fn gamma(&self) -> Result<f64> {
        match self.gamma {
            GammaStrategy::Explicit(g) => Ok(g),
            GammaStrategy::Normalized => {
                let qp = wedge(self.q, self.p);
                if qp == 0 {
                    return Err(Error::Parallel {
                        p: self.p,
                        q: self.q,
                    });
                }
                Ok(self.normalizer() / qp as f64)
            }
        }
    }

    pub fn steady_state(&self) -> Result<SteadyState> {
        let g = self.gamma()?;
        let pp = self.p.norm_sq() as f64;
        let smooth = 1.0 + self.alpha * self.alpha * pp;
        let (forcing, stream) = match self.model {
            ModelKind::NavierStokes => (pp * g, g / pp),
            ModelKind::NsAlpha => (pp * g, g / (pp * smooth)),
            ModelKind::SecondGrade | ModelKind::NsVoigt => (pp * g / smooth, g / (pp * smooth)),
        };
        Ok(SteadyState {
            vorticity_amplitude: g,
            forcing_amplitude: forcing,
            stream_amplitude: stream,
        })
    }

    /// `c_n = ‖q + n p‖²`, exact.
    pub fn c(&self, n: i64) -> i64 {
        (self.q + n * self.p).norm_sq()
    }

    /// Interaction sequence `ρ_n` (`ρ'_n` for the α-models).
    pub fn rho(&self, n: i64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let c_int = self.c(n);
        let pp_int = self.p.norm_sq();
        if c_int == pp_int {
            return 0.0;
        }
        let c = c_int as f64;
        let pp = pp_int as f64;
        let a2 = self.alpha * self.alpha;
        let shape = match self.model {
            ModelKind::NavierStokes => (c - pp) / c,
            ModelKind::SecondGrade | ModelKind::NsAlpha => {
                (c - pp) * (1.0 + a2 * (c + pp)) / ((1.0 + a2 * c) * c)
            }
            ModelKind::NsVoigt => (c - pp) / (c * (1.0 + a2 * c)),
        };
        self.scale * shape
    }

    /// Viscous weight `d_n`: `c_n`, or `c_n / (1 + α² c_n)` for the
    /// second-grade and Voigt models.
    pub fn viscous_weight(&self, n: i64) -> f64 {
        let c = self.c(n) as f64;
        if self.model.smoothed_viscosity() {
            c / (1.0 + self.alpha * self.alpha * c)
        } else {
            c
        }
    }

    /// Diagonal entry `−ν d_n` of the restricted operator.
    pub fn diagonal(&self, n: i64) -> f64 {
        -self.nu * self.viscous_weight(n)
    }

    /// Continued-fraction coefficient `(λ + ν d_n) / ρ_n`
    /// (`a_n`, `e_n`, `l_n` or `i_n` depending on the model).
    pub fn coeff(&self, n: i64, lambda: f64) -> Result<f64> {
        let rho = self.rho(n);
        if rho == 0.0 {
            return Err(Error::IndexUndefined { n });
        }
        Ok((lambda + self.nu * self.viscous_weight(n)) / rho)
    }

    /// `b_n = c_n² / (c_n − ‖p‖²)`, the Navier–Stokes coefficient at `λ = 0`
    /// per unit viscosity.
    pub fn b(&self, n: i64) -> Result<f64> {
        if self.model != ModelKind::NavierStokes {
            return Err(Error::UnsupportedModel {
                model: self.model,
                operation: "b_n",
            });
        }
        if self.scale == 0.0 {
            return Err(Error::Parallel {
                p: self.p,
                q: self.q,
            });
        }
        let c = self.c(n);
        let pp = self.p.norm_sq();
        if c == pp {
            return Err(Error::DivisionByZero { n });
        }
        let c = c as f64;
        Ok(c * c / ((c - pp as f64) * self.scale))
    }

    pub fn stream(&self, lambda: f64) -> CoefficientStream<'_> {
        CoefficientStream {
            params: self,
            lambda,
        }
    }
}

/// The maps `n ↦ ρ_n`, `n ↦ c_n` and `n ↦ coefficient` at a fixed `λ`.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientStream<'a> {
    params: &'a FlowParams,
    lambda: f64,
}

impl<'a> CoefficientStream<'a> {
    pub fn params(&self) -> &'a FlowParams {
        self.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self, n: i64) -> i64 {
        self.params.c(n)
    }

    pub fn rho(&self, n: i64) -> f64 {
        self.params.rho(n)
    }

    pub fn coeff(&self, n: i64) -> Result<f64> {
        self.params.coeff(n, self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: LatticeVector = LatticeVector::new(3, 1);
    const Q0: LatticeVector = LatticeVector::new(-1, 2);
    const QPLUS: LatticeVector = LatticeVector::new(0, -2);

    fn ns(q: LatticeVector, nu: f64) -> FlowParams {
        FlowParams::new(ModelKind::NavierStokes, P, q, nu, None).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn beta_examples() {
        assert!(close(beta(P, Q0, ModelKind::NavierStokes, 0.0), 0.35, 1e-15));
        for m in ModelKind::ALL {
            assert_eq!(beta(P, P, m, 0.7), 0.0);
            assert_eq!(beta(P, LatticeVector::ZERO, m, 0.7), 0.0);
        }
        let expect = 0.5 * (1.0 / 30.0 - 1.0 / 110.0) * 7.0;
        assert!(close(beta(P, Q0, ModelKind::NsAlpha, 1.0), expect, 1e-15));
    }

    #[test]
    fn beta_is_symmetric() {
        let k = LatticeVector::new(2, -5);
        for m in ModelKind::ALL {
            assert!(close(beta(P, k, m, 0.3), beta(k, P, m, 0.3), 1e-14));
        }
    }

    #[test]
    fn gamma_examples() {
        assert!(close(ns(Q0, 0.1).gamma().unwrap(), -20.0 / 7.0, 1e-15));
        let explicit = ns(Q0, 0.1).with_gamma(GammaStrategy::Explicit(1.5)).unwrap();
        assert_eq!(explicit.gamma().unwrap(), 1.5);
        let nsa = FlowParams::new(ModelKind::NsAlpha, P, Q0, 0.1, Some(1.0)).unwrap();
        assert!(close(nsa.gamma().unwrap(), -220.0 / 7.0, 1e-15));
        let par = ns(LatticeVector::new(6, 2), 0.1);
        assert!(matches!(par.gamma(), Err(Error::Parallel { .. })));
    }

    #[test]
    fn rho_examples() {
        let f = ns(Q0, 0.06);
        assert!(close(f.rho(0), -1.0, 1e-15));
        assert!(close(f.rho(1), 3.0 / 13.0, 1e-15));
        assert!(close(f.rho(-1), 7.0 / 17.0, 1e-15));
        assert_eq!(ns(QPLUS, 0.06).rho(1), 0.0);
        // Monotone approach to one.
        let mut prev = f.rho(2);
        for n in 3..200 {
            let r = f.rho(n);
            assert!(r > prev && r < 1.0);
            prev = r;
        }
    }

    #[test]
    fn rho_equals_gamma_times_beta() {
        for m in ModelKind::ALL {
            let f = FlowParams::new(m, P, Q0, 0.05, Some(0.4)).unwrap();
            let g = f.gamma().unwrap();
            for n in -15..=15 {
                let k = Q0 + n * P;
                let via_beta = g * beta(P, k, m, 0.4);
                assert!(close(f.rho(n), via_beta, 1e-13), "{m} n={n}");
            }
        }
    }

    #[test]
    fn explicit_gamma_scales_rho() {
        let base = ns(Q0, 0.06);
        let g = 2.0 * base.gamma().unwrap();
        let scaled = base.clone().with_gamma(GammaStrategy::Explicit(g)).unwrap();
        for n in -5..=5 {
            assert!(close(scaled.rho(n), 2.0 * base.rho(n), 1e-14));
        }
    }

    #[test]
    fn recurrence_coeff_examples() {
        let f = ns(Q0, 0.3);
        assert!(close(f.coeff(0, 0.7).unwrap(), -(0.7 + 5.0 * 0.3), 1e-15));
        assert!(close(f.coeff(1, 0.0).unwrap(), 0.3 * 169.0 / 3.0, 1e-14));
        assert_eq!(
            ns(QPLUS, 0.3).coeff(1, 0.5),
            Err(Error::IndexUndefined { n: 1 })
        );
    }

    #[test]
    fn b_examples() {
        let f = ns(Q0, 0.06);
        assert!(close(f.b(1).unwrap(), 169.0 / 3.0, 1e-15));
        assert!(close(f.b(-1).unwrap(), 289.0 / 7.0, 1e-15));
        assert!(close(f.b(2).unwrap(), 1681.0 / 31.0, 1e-15));
        assert_eq!(ns(QPLUS, 0.06).b(1), Err(Error::DivisionByZero { n: 1 }));
        for k in 5..40 {
            assert!(f.b(2 * k).unwrap() >= 4.0 * (k * k) as f64);
        }
        let sg = FlowParams::new(ModelKind::SecondGrade, P, Q0, 0.06, Some(1.0)).unwrap();
        assert!(matches!(sg.b(1), Err(Error::UnsupportedModel { .. })));
    }

    #[test]
    fn nu_b_is_coefficient_at_zero() {
        for nu in [1e-3, 0.06, 2.5] {
            let f = ns(Q0, nu);
            for n in -30..=30 {
                let lhs = nu * f.b(n).unwrap();
                assert!(close(lhs, f.coeff(n, 0.0).unwrap(), 1e-13), "n={n}");
            }
        }
    }

    #[test]
    fn voigt_coefficient_at_zero_is_nu_b() {
        let nu = 0.06;
        let b = ns(Q0, nu);
        for alpha in [0.1, 0.5, 3.0] {
            let v = FlowParams::new(ModelKind::NsVoigt, P, Q0, nu, Some(alpha)).unwrap();
            for n in -20..=20 {
                assert!(close(v.coeff(n, 0.0).unwrap(), nu * b.b(n).unwrap(), 1e-13));
            }
        }
    }

    #[test]
    fn alpha_models_reduce_to_navier_stokes() {
        let base = ns(Q0, 0.06);
        for m in [ModelKind::SecondGrade, ModelKind::NsAlpha, ModelKind::NsVoigt] {
            let mut prev_err = f64::INFINITY;
            for alpha in [1e-2, 1e-3] {
                let f = FlowParams::new(m, P, Q0, 0.06, Some(alpha)).unwrap();
                let mut err: f64 = 0.0;
                for n in -10..=10 {
                    for lambda in [0.0, 0.2, 1.0] {
                        let d = (f.coeff(n, lambda).unwrap() - base.coeff(n, lambda).unwrap()).abs();
                        err = err.max(d);
                    }
                }
                // Window constant: |n| <= 10 gives c_n <= 1100, so C ~ 1e3·max|a_n|.
                assert!(err <= 1e5 * alpha * alpha, "{m} alpha={alpha} err={err}");
                assert!(err < prev_err);
                prev_err = err;
            }
        }
    }

    #[test]
    fn second_grade_coefficient_limit() {
        let (nu, alpha, lambda) = (0.2, 0.5, 0.3);
        let f = FlowParams::new(ModelKind::SecondGrade, P, Q0, nu, Some(alpha)).unwrap();
        let limit = lambda + nu / (alpha * alpha);
        assert!(close(f.coeff(5000, lambda).unwrap(), limit, 1e-5));
        assert!(close(f.coeff(-5000, lambda).unwrap(), limit, 1e-5));
        let nsa = FlowParams::new(ModelKind::NsAlpha, P, Q0, nu, Some(alpha)).unwrap();
        assert!(nsa.coeff(5000, lambda).unwrap() > 1e6);
    }

    #[test]
    fn sign_structure_per_class() {
        for m in ModelKind::ALL {
            let i0 = FlowParams::new(m, P, Q0, 0.1, Some(0.5)).unwrap();
            assert!(i0.rho(0) < 0.0);
            assert!((1..30).all(|n| i0.rho(n) > 0.0 && i0.rho(-n) > 0.0));
            let ip = FlowParams::new(m, P, QPLUS, 0.1, Some(0.5)).unwrap();
            assert!(ip.rho(0) < 0.0 && ip.rho(1) == 0.0);
            assert!((2..30).all(|n| ip.rho(n) > 0.0) && (1..30).all(|n| ip.rho(-n) > 0.0));
            let im = FlowParams::new(m, P, LatticeVector::new(2, -2), 0.1, Some(0.5)).unwrap();
            assert!(im.rho(0) < 0.0 && im.rho(-1) == 0.0);
            assert!((1..30).all(|n| im.rho(n) > 0.0) && (2..30).all(|n| im.rho(-n) > 0.0));
        }
    }

    #[test]
    fn normalized_rho_tends_to_one() {
        for m in [ModelKind::NavierStokes, ModelKind::SecondGrade, ModelKind::NsAlpha] {
            let f = FlowParams::new(m, P, Q0, 0.1, Some(0.5)).unwrap();
            assert!(close(f.rho(10_000), 1.0, 1e-6));
            assert!(close(f.rho(-10_000), 1.0, 1e-6));
        }
        // With a constant Gamma the Voigt sequence decays instead.
        let v = FlowParams::new(ModelKind::NsVoigt, P, Q0, 0.1, Some(0.5)).unwrap();
        assert!(v.rho(10_000) < 1e-6);
    }

    #[test]
    fn constructor_validation() {
        assert_eq!(
            FlowParams::new(ModelKind::NavierStokes, LatticeVector::ZERO, Q0, 0.1, None),
            Err(Error::ZeroWavevector)
        );
        assert!(FlowParams::new(ModelKind::SecondGrade, P, Q0, 0.1, None).is_err());
        assert!(FlowParams::new(ModelKind::NsAlpha, P, Q0, 0.1, Some(0.0)).is_err());
        assert!(FlowParams::new(ModelKind::NavierStokes, P, Q0, -1.0, None).is_err());
        let f = FlowParams::new(ModelKind::NavierStokes, P, LatticeVector::new(2, 3), 0.1, None).unwrap();
        assert_eq!(f.q(), Q0);
        assert_eq!(f.shift(), -1);
        assert_eq!(f.class(), PointClass::TypeI0);
    }

    #[test]
    fn steady_state_amplitudes() {
        let f = ns(Q0, 0.1);
        let s = f.steady_state().unwrap();
        assert!(close(s.forcing_amplitude, 10.0 * s.vorticity_amplitude, 1e-15));
        assert!(close(s.stream_amplitude, s.vorticity_amplitude / 10.0, 1e-15));
        let sg = FlowParams::new(ModelKind::SecondGrade, P, Q0, 0.1, Some(1.0)).unwrap();
        let s = sg.steady_state().unwrap();
        assert!(close(s.forcing_amplitude, 10.0 * s.vorticity_amplitude / 11.0, 1e-15));
        assert!(close(s.stream_amplitude, s.vorticity_amplitude / 110.0, 1e-15));
    }
}
