//! Vectors of Minkowski 4-space with signature (-,+,+,+).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

/// Relative width of the null band used by [`causal_character`] when no
/// explicit tolerance is given.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// A point or vector of Minkowski space, in coordinates of the canonical basis `e0..e3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeVector(pub [f64; 4]);

impl SpacetimeVector {
    pub const ZERO: Self = Self([0.0; 4]);

    pub const fn new(u0: f64, u1: f64, u2: f64, u3: f64) -> Self {
        Self([u0, u1, u2, u3])
    }

    /// Canonical basis vector `e_i`.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        minkowski_dot(self, other)
    }

    /// Minkowski square `<v,v>`.
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean length of the coordinate tuple; used only for scaling tolerances.
    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coordinates with the metric applied, so that `lowered().0 · w.0 == <self, w>`.
    pub fn lowered(&self) -> [f64; 4] {
        [-self.0[0], self.0[1], self.0[2], self.0[3]]
    }
}

impl Index<usize> for SpacetimeVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for SpacetimeVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for SpacetimeVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for SpacetimeVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl Mul<SpacetimeVector> for f64 {
    type Output = SpacetimeVector;
    fn mul(self, v: SpacetimeVector) -> SpacetimeVector {
        SpacetimeVector(v.0.map(|c| self * c))
    }
}

impl fmt::Display for SpacetimeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

/// `<u,v> = -u0 v0 + u1 v1 + u2 v2 + u3 v3`.
pub fn minkowski_dot(u: &SpacetimeVector, v: &SpacetimeVector) -> f64 {
    -u.0[0] * v.0[0] + u.0[1] * v.0[1] + u.0[2] * v.0[2] + u.0[3] * v.0[3]
}

/// Causal character of a vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Null,
    Zero,
}

/// Classifies `v` by the sign of `<v,v>`.
///
/// `tol` is relative: coordinates below `tol` count as zero, and the null band
/// is `|<v,v>| < tol * max(1, |v|^2)` with `|v|` the Euclidean coordinate norm.
pub fn causal_character(v: &SpacetimeVector, tol: f64) -> CausalCharacter {
    if v.max_abs() < tol {
        return CausalCharacter::Zero;
    }
    let q = v.norm_sq();
    let scale = v.euclidean_norm().powi(2).max(1.0);
    if q.abs() < tol * scale {
        CausalCharacter::Null
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}
