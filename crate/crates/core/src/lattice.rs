//! Integer-lattice geometry for the wavevector orbits `{q + n p : n ∈ ℤ}`.
//!
//! Everything here is exact integer arithmetic. Classification boundary
//! cases (`‖q̂ ± p‖ = ‖p‖`) are decided by integer equality, never by a
//! floating-point comparison.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A point of `ℤ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub x: i64,
    pub y: i64,
}

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        LatticeVector { x, y }
    }

    pub fn norm_sq(self) -> i64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn dot(self, other: LatticeVector) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// `(-y, x)`.
    pub fn perp(self) -> Self {
        LatticeVector::new(-self.y, self.x)
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector::new(-self.x, -self.y)
    }
}

impl Mul<LatticeVector> for i64 {
    type Output = LatticeVector;
    fn mul(self, rhs: LatticeVector) -> LatticeVector {
        LatticeVector::new(self * rhs.x, self * rhs.y)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseLatticeVectorError(String);

impl fmt::Display for ParseLatticeVectorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected an integer pair like `3,1`, got `{}`", self.0)
    }
}

impl std::error::Error for ParseLatticeVectorError {}

impl FromStr for LatticeVector {
    type Err = ParseLatticeVectorError;

    /// Accepts `3,1`, `(3,1)` and `3, 1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseLatticeVectorError(s.to_string());
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = trimmed.split(',');
        let x = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        let y = parts.next().ok_or_else(err)?.trim().parse().map_err(|_| err())?;
        if parts.next().is_some() {
            return Err(err());
        }
        Ok(LatticeVector::new(x, y))
    }
}

/// `p ∧ q = det[p1 q1; p2 q2]`.
pub fn wedge(p: LatticeVector, q: LatticeVector) -> i64 {
    p.x * q.y - p.y * q.x
}

/// Orbit class of `q` relative to the disk of radius `‖p‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    /// No orbit point strictly inside the disk.
    Type0,
    /// One point inside, both neighbours strictly outside the circle.
    TypeI0,
    /// One point inside, `q̂ + p` on the circle.
    TypeIPlus,
    /// One point inside, `q̂ − p` on the circle.
    TypeIMinus,
    /// Two points inside.
    TypeII,
    /// `q ∧ p = 0`: the restricted operator vanishes.
    Parallel,
}

impl PointClass {
    pub fn label(self) -> &'static str {
        match self {
            PointClass::Type0 => "0",
            PointClass::TypeI0 => "I0",
            PointClass::TypeIPlus => "I+",
            PointClass::TypeIMinus => "I-",
            PointClass::TypeII => "II",
            PointClass::Parallel => "parallel",
        }
    }

    /// Classes for which a dispersion equation exists.
    pub fn is_type_one(self) -> bool {
        matches!(
            self,
            PointClass::TypeI0 | PointClass::TypeIPlus | PointClass::TypeIMinus
        )
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Minimal-norm representative `q̂ = q + shift·p` of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitRep {
    pub rep: LatticeVector,
    pub shift: i64,
}

/// Minimal-norm point of `{q + n p}`; on a tie the larger `n` wins.
///
/// `‖q + n p‖²` is a convex quadratic in `n`, so the integer minimiser is the
/// floor or the ceiling of the real vertex `−(q·p)/‖p‖²`.
///
/// # Panics
/// If `p` is zero.
pub fn canonical_rep(q: LatticeVector, p: LatticeVector) -> OrbitRep {
    assert!(!p.is_zero(), "canonical_rep: p must be non-zero");
    let pp = p.norm_sq();
    let lo = (-q.dot(p)).div_euclid(pp);
    let hi = lo + 1;
    let at = |n: i64| (q + n * p).norm_sq();
    let shift = if at(hi) <= at(lo) { hi } else { lo };
    OrbitRep {
        rep: q + shift * p,
        shift,
    }
}

/// Classify the orbit of `q`. `q` need not be canonical.
///
/// # Panics
/// If `p` is zero.
pub fn classify(q: LatticeVector, p: LatticeVector) -> PointClass {
    assert!(!p.is_zero(), "classify: p must be non-zero");
    if wedge(p, q) == 0 {
        return PointClass::Parallel;
    }
    let pp = p.norm_sq();
    let rep = canonical_rep(q, p).rep;
    if rep.norm_sq() >= pp {
        return PointClass::Type0;
    }
    // Points inside an open disk of diameter 2‖p‖ spaced ‖p‖ apart: at most
    // two, and they are adjacent to q̂.
    let plus = (rep + p).norm_sq();
    let minus = (rep - p).norm_sq();
    if plus < pp || minus < pp {
        PointClass::TypeII
    } else if plus == pp {
        PointClass::TypeIPlus
    } else if minus == pp {
        PointClass::TypeIMinus
    } else {
        PointClass::TypeI0
    }
}

/// All orbit classes with a representative of norm at most `radius`.
///
/// The orbit through the origin is omitted (it carries no Fourier mode).
/// The result is sorted by `(‖q̂‖², q̂)`.
pub fn enumerate_classes(p: LatticeVector, radius: f64) -> Vec<(OrbitRep, PointClass)> {
    assert!(!p.is_zero(), "enumerate_classes: p must be non-zero");
    if !(radius > 0.0) {
        return Vec::new();
    }
    let bound = radius.floor() as i64;
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            let q = LatticeVector::new(x, y);
            if q.norm() > radius {
                continue;
            }
            let orbit = canonical_rep(q, p);
            // The origin is the representative of its own orbit.
            if orbit.rep != q || q.is_zero() {
                continue;
            }
            out.push((OrbitRep { rep: q, shift: 0 }, classify(q, p)));
        }
    }
    out.sort_by_key(|(o, _)| (o.rep.norm_sq(), o.rep));
    out
}
