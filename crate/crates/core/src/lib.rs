//! Linear instability of unidirectional steady flows of the 2D Navier–Stokes
//! equations and the second-grade, NS-α and NS-Voigt models.
//!
//! The restricted linear operator on an orbit `{q + n p}` is a tridiagonal
//! recurrence; its positive eigenvalues are the roots of a continued-fraction
//! dispersion function ([`dispersion`]). Every root can be checked against
//! finite sections, perturbation determinants and time stepping
//! ([`spectral`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contfrac;
pub mod dispersion;
pub mod eigensystem;
pub mod error;
pub mod lattice;
pub mod models;
pub mod spectral;

pub use contfrac::{BracketedValue, Direction, TailSpec, Truncation};
pub use dispersion::{nu0_estimate, DispersionSpec, Nu0Options, RootOptions, RootResult, Variant};
pub use eigensystem::{build_u, build_w, EigenOptions, EigenvectorResult};
pub use error::{Error, Result};
pub use lattice::{canonical_rep, classify, enumerate_classes, wedge, LatticeVector, OrbitRep, PointClass};
pub use models::{beta, FlowParams, GammaStrategy, ModelKind, SteadyState};
pub use spectral::{det_i_plus_k, det_root, growth_rate, max_real_eig, DeterminantSample, TruncatedOperator};
