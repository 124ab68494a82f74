//! Second-order jets of scalar functions of the surface coordinates `(x, y)`.
//!
//! A [`Jet2`] carries a value together with its first and second partial
//! derivatives. Arithmetic on jets applies the Leibniz and chain rules, so a
//! closed-form expression evaluated on the coordinate generators yields exact
//! derivatives up to rounding.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

/// Failure of a partial jet operation.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet whose value slot is zero (v = {value})")]
    DivisionByZero { value: f64 },
    #[error("square root of a jet whose value slot is not positive (v = {value})")]
    NegativeRadicand { value: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Self { v, dx: 0.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The coordinate function `x` at a point with abscissa `x`.
    pub const fn var_x(x: f64) -> Self {
        Self { v: x, dx: 1.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The coordinate function `y` at a point with ordinate `y`.
    pub const fn var_y(y: f64) -> Self {
        Self { v: y, dx: 0.0, dy: 1.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            v: s * self.v,
            dx: s * self.dx,
            dy: s * self.dy,
            dxx: s * self.dxx,
            dxy: s * self.dxy,
            dyy: s * self.dyy,
        }
    }

    /// Applies a univariate function given its value and first two derivatives at `self.v`.
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f0,
            dx: f1 * self.dx,
            dy: f1 * self.dy,
            dxx: f2 * self.dx * self.dx + f1 * self.dxx,
            dxy: f2 * self.dx * self.dy + f1 * self.dxy,
            dyy: f2 * self.dy * self.dy + f1 * self.dyy,
        }
    }

    pub fn recip(self) -> Result<Self, JetError> {
        if self.v == 0.0 || !self.v.is_finite() {
            return Err(JetError::DivisionByZero { value: self.v });
        }
        let r = 1.0 / self.v;
        Ok(self.compose(r, -r * r, 2.0 * r * r * r))
    }

    pub fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        Ok(self * rhs.recip()?)
    }

    pub fn sqrt(self) -> Result<Self, JetError> {
        if !(self.v > 0.0) {
            return Err(JetError::NegativeRadicand { value: self.v });
        }
        let s = self.v.sqrt();
        Ok(self.compose(s, 0.5 / s, -0.25 / (s * self.v)))
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.dx, self.dy]
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Add<f64> for Jet2 {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Self { v: self.v + c, ..self }
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j.scale(self)
    }
}
