use thiserror::Error;

use crate::lattice::{LatticeVector, PointClass};
use crate::models::ModelKind;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavevector p must be non-zero")]
    ZeroWavevector,

    #[error("q = {q} is parallel to p = {p}; the restricted operator vanishes")]
    Parallel { p: LatticeVector, q: LatticeVector },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `ρ_n = 0`: the I₊/I₋ dispersion variant must skip this index.
    #[error("recurrence coefficient undefined at n = {n} (rho_n = 0)")]
    IndexUndefined { n: i64 },

    #[error("b_n undefined at n = {n}: c_n equals |p|^2")]
    DivisionByZero { n: i64 },

    /// A partial denominator vanished; retry with the depth perturbed by one.
    #[error("continued fraction degenerate: zero denominator at depth {depth}")]
    DegenerateFraction { depth: usize },

    #[error("{what} did not converge within {limit} (last gap {gap:e})")]
    NoConvergence {
        what: &'static str,
        limit: usize,
        gap: f64,
    },

    #[error("class {class} not supported by {operation}")]
    UnsupportedClass {
        class: PointClass,
        operation: &'static str,
    },

    #[error("model {model} not supported by {operation}")]
    UnsupportedModel {
        model: ModelKind,
        operation: &'static str,
    },

    /// No positive root located on the scan grid. This does not certify
    /// stability.
    #[error("no sign change of {what} on ({lower:e}, {upper:e}]")]
    NoSignChange {
        what: &'static str,
        lower: f64,
        upper: f64,
    },

    #[error("no critical-viscosity crossing found below nu = {cap}")]
    NotFound { cap: f64 },

    #[error("u_0 mismatch: forward {forward:e} vs backward {backward:e} (lambda is not a root)")]
    MatchFailure { forward: f64, backward: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
