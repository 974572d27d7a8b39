//! Dispersion functions and their positive roots.
//!
//! For a type-I orbit a real `λ > 0` is an eigenvalue of the restricted
//! operator (with the sign-patterned eigenvector) exactly when
//!
//! | class | equation          |
//! |-------|-------------------|
//! | I₀    | `a₀ + f + g = 0`  |
//! | I₊    | `a₀ + g = 0`      |
//! | I₋    | `a₀ + f = 0`      |
//!
//! with `f = [a₁; a₂; …]`, `g = [a₋₁; a₋₂; …]` and `a_n` the model's
//! recurrence coefficient.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::contfrac::{evaluate, BracketedValue, TailSpec, Truncation};
use crate::error::{Error, Result};
use crate::lattice::PointClass;
use crate::models::FlowParams;

/// Which tails enter the dispersion function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `a₀ + f + g` (type I₀).
    Both,
    /// `a₀ + g` (type I₊).
    BackwardOnly,
    /// `a₀ + f` (type I₋).
    ForwardOnly,
}

impl Variant {
    pub fn for_class(class: PointClass) -> Option<Self> {
        match class {
            PointClass::TypeI0 => Some(Variant::Both),
            PointClass::TypeIPlus => Some(Variant::BackwardOnly),
            PointClass::TypeIMinus => Some(Variant::ForwardOnly),
            _ => None,
        }
    }

    pub fn uses_forward(self) -> bool {
        self != Variant::BackwardOnly
    }

    pub fn uses_backward(self) -> bool {
        self != Variant::ForwardOnly
    }
}

/// Terms of the dispersion function at one `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub lambda: f64,
    pub a0: f64,
    pub f: Option<BracketedValue>,
    pub g: Option<BracketedValue>,
}

impl Components {
    pub fn tails(&self) -> f64 {
        self.f.map_or(0.0, |b| b.value) + self.g.map_or(0.0, |b| b.value)
    }

    pub fn value(&self) -> f64 {
        self.a0 + self.tails()
    }

    pub fn depth(&self) -> usize {
        let f = self.f.map_or(0, |b| b.depth);
        let g = self.g.map_or(0, |b| b.depth);
        f.max(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSpec {
    params: FlowParams,
    variant: Variant,
    truncation: Truncation,
}

impl DispersionSpec {
    /// Rejects classes without a dispersion equation and an explicit `Γ`
    /// whose sign flips the interaction sequence.
    pub fn new(params: FlowParams, truncation: Truncation) -> Result<Self> {
        let class = params.class();
        let variant = Variant::for_class(class).ok_or(Error::UnsupportedClass {
            class,
            operation: "the dispersion equation",
        })?;
        if !(params.rho_scale() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gamma must have the sign of q^p (got prefactor {})",
                params.rho_scale()
            )));
        }
        Ok(DispersionSpec {
            params,
            variant,
            truncation,
        })
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        Ok(DispersionSpec {
            params: self.params.with_nu(nu)?,
            ..self.clone()
        })
    }

    /// Each tail is evaluated to a quarter of the adaptive tolerance.
    pub fn components(&self, lambda: f64) -> Result<Components> {
        let trunc = self.truncation.split(4.0);
        let f = if self.variant.uses_forward() {
            Some(evaluate(&TailSpec::forward(&self.params, lambda), trunc)?)
        } else {
            None
        };
        let g = if self.variant.uses_backward() {
            Some(evaluate(&TailSpec::backward(&self.params, lambda), trunc)?)
        } else {
            None
        };
        Ok(Components {
            lambda,
            a0: self.params.coeff(0, lambda)?,
            f,
            g,
        })
    }

    pub fn value(&self, lambda: f64) -> Result<f64> {
        Ok(self.components(lambda)?.value())
    }

    /// `10·(‖p‖² + ν·max_{|n|≤1} c_n)`, enlarged if the interaction sequence
    /// near the origin is large.
    pub fn default_lambda_cap(&self) -> f64 {
        let p = &self.params;
        let pp = p.p().norm_sq() as f64;
        let cmax = (-1..=1).map(|n| p.c(n)).max().unwrap_or(0) as f64;
        let rho_max = (-3..=3)
            .map(|n| p.rho(n).abs())
            .fold(p.rho_scale().abs(), f64::max);
        10.0 * (pp + p.nu() * cmax).max(rho_max)
    }

    /// Geometric grid `start, 2·start, …` ending exactly at `cap`.
    pub fn scan_grid(&self, opts: &RootOptions) -> Vec<f64> {
        let cap = opts.lambda_cap.unwrap_or_else(|| self.default_lambda_cap());
        let mut out = Vec::new();
        let mut x = opts.scan_start.unwrap_or(opts.tol);
        while x < cap {
            out.push(x);
            x *= opts.scan_factor;
        }
        out.push(cap);
        out
    }

    /// Smallest positive root found by a geometric scan followed by bisection.
    ///
    /// `NoSignChange` means no root was located on the grid; it does not
    /// certify that none exists.
    pub fn find_root(&self, opts: &RootOptions) -> Result<RootResult> {
        opts.validate()?;
        if !(self.params.nu() > 0.0) {
            return Err(Error::InvalidParameter(
                "root search requires a positive viscosity".into(),
            ));
        }
        let grid = self.scan_grid(opts);
        let evaluations = Cell::new(0usize);
        let eval = |lambda: f64| -> Result<Components> {
            evaluations.set(evaluations.get() + 1);
            self.components(lambda)
        };

        let first = eval(grid[0])?;
        if !(first.value() > 0.0) {
            return Err(Error::NoSignChange {
                what: "dispersion function",
                lower: grid[0],
                upper: *grid.last().unwrap(),
            });
        }
        let mut lo = grid[0];
        let mut hi = None;
        for &x in &grid[1..] {
            let c = eval(x)?;
            if c.value() > 0.0 {
                lo = x;
            } else {
                hi = Some((x, c));
                break;
            }
        }
        let (mut hi, mut hi_c) = hi.ok_or(Error::NoSignChange {
            what: "dispersion function",
            lower: grid[0],
            upper: *grid.last().unwrap(),
        })?;

        let mut best = hi_c;
        let mut best_x = hi;
        loop {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let c = eval(mid)?;
            if c.value().abs() <= best.value().abs() {
                best = c;
                best_x = mid;
            }
            if c.value() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
                hi_c = c;
            }
            if hi - lo <= opts.tol && best.value().abs() <= opts.tol {
                break;
            }
            if evaluations.get() > opts.max_evaluations {
                break;
            }
        }
        let lambda = 0.5 * (lo + hi);
        let at = eval(lambda)?;
        let (lambda, at) = if at.value().abs() <= best.value().abs() {
            (lambda, at)
        } else {
            (best_x, best)
        };
        if at.value().abs() > opts.tol {
            return Err(Error::NoConvergence {
                what: "dispersion root bisection",
                limit: opts.max_evaluations,
                gap: at.value().abs(),
            });
        }
        Ok(RootResult {
            lambda,
            bracket: (lo, hi),
            dispersion_residual: at.value(),
            cf_depth: at.depth().max(hi_c.depth()),
            found: true,
            evaluations: evaluations.get(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Bracket width and `|value|` target.
    pub tol: f64,
    /// Upper end of the scan; `None` uses [`DispersionSpec::default_lambda_cap`].
    pub lambda_cap: Option<f64>,
    /// First scan point; `None` uses `tol`.
    pub scan_start: Option<f64>,
    pub scan_factor: f64,
    pub max_evaluations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-10,
            lambda_cap: None,
            scan_start: None,
            scan_factor: 2.0,
            max_evaluations: 500,
        }
    }
}

impl RootOptions {
    pub fn with_tol(tol: f64) -> Self {
        RootOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.scan_factor > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scan factor must exceed 1, got {}",
                self.scan_factor
            )));
        }
        if let Some(cap) = self.lambda_cap {
            if !(cap > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda cap must be positive, got {cap}"
                )));
            }
        }
        if let Some(s) = self.scan_start {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "scan start must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub lambda: f64,
    pub bracket: (f64, f64),
    pub dispersion_residual: f64,
    pub cf_depth: usize,
    pub found: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nu0Options {
    pub tol: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub scan_factor: f64,
    /// Depth cap for the `λ = 0` tails (which converge slowly as `ν → 0`).
    pub max_depth: usize,
}

impl Default for Nu0Options {
    fn default() -> Self {
        Nu0Options {
            tol: 1e-8,
            nu_min: 1e-4,
            nu_max: 1e3,
            scan_factor: 1.25,
            max_depth: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nu0Result {
    pub nu0: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

/// `h(ν)`: the dispersion function at `λ = 0` as a function of viscosity.
pub fn h_at(spec: &DispersionSpec, nu: f64) -> Result<f64> {
    spec.with_nu(nu)?.value(0.0)
}

/// Smallest viscosity above `nu_min` where `h(ν)` turns from positive to
/// non-positive. Below it the dispersion equation has a positive root.
pub fn nu0_estimate(params: &FlowParams, opts: &Nu0Options) -> Result<Nu0Result> {
    if !(opts.tol > 0.0 && opts.nu_min > 0.0 && opts.nu_max > opts.nu_min && opts.scan_factor > 1.0) {
        return Err(Error::InvalidParameter(
            "nu0 scan needs tol > 0, 0 < nu_min < nu_max and factor > 1".into(),
        ));
    }
    let spec = DispersionSpec::new(
        params.clone(),
        Truncation::Adaptive {
            tol: opts.tol * 1e-2,
            max_depth: opts.max_depth,
        },
    )?;
    let evaluations = Cell::new(0usize);
    let h = |nu: f64| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        h_at(&spec, nu)
    };
    let mut lo = opts.nu_min;
    if !(h(lo)? > 0.0) {
        return Err(Error::NotFound { cap: opts.nu_min });
    }
    let mut hi = None;
    let mut nu = lo;
    while nu < opts.nu_max {
        nu = (nu * opts.scan_factor).min(opts.nu_max);
        if h(nu)? > 0.0 {
            lo = nu;
        } else {
            hi = Some(nu);
            break;
        }
    }
    let mut hi = hi.ok_or(Error::NotFound { cap: opts.nu_max })?;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if h(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Nu0Result {
        nu0: 0.5 * (lo + hi),
        bracket: (lo, hi),
        evaluations: evaluations.get(),
    })
}
