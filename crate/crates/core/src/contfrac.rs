//! Continued fractions `[a₁; a₂; …] = 1/(a₁ + 1/(a₂ + …))`.
//!
//! Truncations are evaluated innermost-first, which is stable for positive
//! coefficients and never forms the (overflowing) convergent numerators.
//! For a positive stream the even truncations increase and the odd ones
//! decrease, so two consecutive depths bracket the limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{FlowParams, ModelKind};

/// Default depth cap for adaptive evaluation.
pub const DEFAULT_MAX_DEPTH: usize = 100_000;

const START_DEPTH: usize = 4;

/// Value of `[a₁; …; a_k]`.
pub fn eval_trunc(coeffs: &[f64]) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::InvalidParameter(
            "continued fraction needs at least one coefficient".into(),
        ));
    }
    eval_with(coeffs.len(), |j| Ok(coeffs[j - 1]))
}

/// Value of `[a(1); …; a(depth)]` for a coefficient generator `a(j)`,
/// `j` counting from one.
pub fn eval_with<F>(depth: usize, mut coeff: F) -> Result<f64>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut x = 0.0;
    for j in (1..=depth).rev() {
        let d = coeff(j)? + x;
        if d == 0.0 {
            return Err(Error::DegenerateFraction { depth: j });
        }
        x = 1.0 / d;
    }
    Ok(x)
}

/// All truncations `t₁, …, t_k` of `[a₁; …; a_k]`, from the convergent
/// recurrence with rescaling.
pub fn truncations(coeffs: &[f64]) -> Vec<f64> {
    // A/B with A_{-1}=1, A_0=0, B_{-1}=0, B_0=1.
    let (mut a_prev, mut a_cur) = (1.0_f64, 0.0_f64);
    let (mut b_prev, mut b_cur) = (0.0_f64, 1.0_f64);
    let mut out = Vec::with_capacity(coeffs.len());
    for &c in coeffs {
        let a_next = c * a_cur + a_prev;
        let b_next = c * b_cur + b_prev;
        a_prev = a_cur;
        b_prev = b_cur;
        a_cur = a_next;
        b_cur = b_next;
        let scale = b_cur.abs().max(a_cur.abs());
        if scale > 1e150 || (scale < 1e-150 && scale > 0.0) {
            a_prev /= scale;
            b_prev /= scale;
            a_cur /= scale;
            b_cur /= scale;
        }
        out.push(a_cur / b_cur);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Indices `first, first+1, …` (the tail `f` for `first = 1`).
    Forward,
    /// Indices `first, first−1, …` (the tail `g` for `first = −1`).
    Backward,
}

/// A coefficient tail `[a_m; a_{m±1}; …]` of a problem instance at fixed `λ`.
#[derive(Debug, Clone, Copy)]
pub struct TailSpec<'a> {
    pub params: &'a FlowParams,
    pub direction: Direction,
    pub lambda: f64,
    pub first: i64,
}

impl<'a> TailSpec<'a> {
    /// `f = [a₁; a₂; …]`.
    pub fn forward(params: &'a FlowParams, lambda: f64) -> Self {
        TailSpec {
            params,
            direction: Direction::Forward,
            lambda,
            first: 1,
        }
    }

    /// `g = [a₋₁; a₋₂; …]`.
    pub fn backward(params: &'a FlowParams, lambda: f64) -> Self {
        TailSpec {
            params,
            direction: Direction::Backward,
            lambda,
            first: -1,
        }
    }

    pub fn new(params: &'a FlowParams, direction: Direction, lambda: f64) -> Self {
        match direction {
            Direction::Forward => Self::forward(params, lambda),
            Direction::Backward => Self::backward(params, lambda),
        }
    }

    pub fn starting_at(mut self, first: i64) -> Self {
        self.first = first;
        self
    }

    /// Lattice index of the `j`-th coefficient (`j ≥ 1`).
    pub fn index(&self, j: usize) -> i64 {
        let step = (j - 1) as i64;
        match self.direction {
            Direction::Forward => self.first + step,
            Direction::Backward => self.first - step,
        }
    }

    pub fn coeff(&self, j: usize) -> Result<f64> {
        self.params.coeff(self.index(j), self.lambda)
    }

    pub fn truncation(&self, depth: usize) -> Result<f64> {
        if depth == 0 {
            return Err(Error::InvalidParameter("truncation depth must be >= 1".into()));
        }
        eval_with(depth, |j| self.coeff(j))
    }
}

/// A continued-fraction value with the two truncations that enclose it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketedValue {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Depth `k` of the first truncation used (the second is `k + 1`).
    pub depth: usize,
}

impl BracketedValue {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// How deep to evaluate a tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Exactly `k` terms; the reported value is the `k`-th truncation.
    Fixed(usize),
    /// Double the depth until consecutive truncations agree to `tol`.
    Adaptive { tol: f64, max_depth: usize },
}

impl Truncation {
    pub fn adaptive(tol: f64) -> Self {
        Truncation::Adaptive {
            tol,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    /// Same strategy with the tolerance divided by `parts`.
    pub fn split(self, parts: f64) -> Self {
        match self {
            Truncation::Adaptive { tol, max_depth } => Truncation::Adaptive {
                tol: tol / parts,
                max_depth,
            },
            fixed => fixed,
        }
    }
}

pub fn evaluate(spec: &TailSpec<'_>, truncation: Truncation) -> Result<BracketedValue> {
    match truncation {
        Truncation::Fixed(k) => eval_fixed(spec, k),
        Truncation::Adaptive { tol, max_depth } => eval_adaptive(spec, tol, max_depth),
    }
}

pub fn eval_fixed(spec: &TailSpec<'_>, depth: usize) -> Result<BracketedValue> {
    let t0 = spec.truncation(depth)?;
    let t1 = spec.truncation(depth + 1)?;
    Ok(BracketedValue {
        value: t0,
        lower: t0.min(t1),
        upper: t0.max(t1),
        depth,
    })
}

pub fn eval_adaptive(spec: &TailSpec<'_>, tol: f64, max_depth: usize) -> Result<BracketedValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_depth == 0 {
        return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
    }
    let mut k = START_DEPTH.min(max_depth);
    loop {
        let t0 = spec.truncation(k)?;
        let t1 = spec.truncation(k + 1)?;
        let gap = (t0 - t1).abs();
        if gap <= tol {
            return Ok(BracketedValue {
                value: 0.5 * (t0 + t1),
                lower: t0.min(t1),
                upper: t0.max(t1),
                depth: k,
            });
        }
        if k >= max_depth {
            return Err(Error::NoConvergence {
                what: "continued fraction",
                limit: max_depth,
                gap,
            });
        }
        k = (2 * k).min(max_depth);
    }
}

/// `b₂ + b₄ + ⋯ + b₂ₖ` (forward) or `b₋₂ + ⋯ + b₋₂ₖ` (backward): the slope
/// at `ν = 0` of the `2k`-th truncation of the Navier–Stokes tail at `λ = 0`.
pub fn even_trunc_slope_at_zero(k: usize, direction: Direction, params: &FlowParams) -> Result<f64> {
    if params.model() != ModelKind::NavierStokes {
        return Err(Error::UnsupportedModel {
            model: params.model(),
            operation: "even-truncation slope",
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let sign = match direction {
        Direction::Forward => 1,
        Direction::Backward => -1,
    };
    (1..=k as i64).map(|j| params.b(sign * 2 * j)).sum()
}
