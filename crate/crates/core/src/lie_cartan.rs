//! Blow-up of the umbilic: 1-jet of the BDE, the Lie-Cartan vector field on
//! the lifted surface `F(x, y, z) = A z^2 + B z + C = 0`, its singularities on
//! the fiber over the umbilic, and the Darbouxian verdict.
//!
//! Coefficients follow the full-`B` convention `A dy^2 + B dx dy + C dx^2`.
//! The half convention `A dy^2 + 2B dx dy - A dx^2` used in parts of the
//! literature is reached through [`BdeOneJet::to_half_convention`].

use crate::error::{Error, Result};
use crate::shape::{BdePoint, ScreenCoefficients, ScreenField};
use crate::surfaces::{CubicForm, FJet, FirstFundamentalForm, Surface};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default tolerance for root spacing, transversality and simplicity tests.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default base step of the Richardson-extrapolated 1-jet of `A, B, C`.
pub const DEFAULT_JET_STEP: f64 = 1e-3;
/// Spatial step of the central differences `F_x`, `F_y`.
pub const FIELD_STEP: f64 = 1e-5;
/// Relative band around `beta2 * beta3 = 0` reported as a degenerate singularity.
pub const HYPERBOLICITY_TOL: f64 = 1e-9;

/// `A ~ a1 x + a2 y`, `B ~ b1 x + b2 y`, `C ~ -(a1 x + a2 y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BdeOneJet {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BdeOneJet {
    pub const fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        Self { a1, a2, b1, b2 }
    }

    /// The 1-jet on a rotation host, `(0, b, a - b, -c)`.
    pub fn rotation_closed_form(a: f64, b: f64, c: f64) -> Self {
        Self::new(0.0, b, a - b, -c)
    }

    /// The published dependence of the 1-jet on the 3-jets of `f` and `g` for
    /// a graph host: `(d + 2 eps, b + 2 zeta, a - b + 2 (delta - zeta), d - c + 2 (eps - lambda))`.
    pub fn graph_closed_form(f: &FJet, g: &CubicForm) -> Self {
        let CubicForm { xxx: delta, xxy: eps, xyy: zeta, yyy: lambda } = *g;
        Self::new(
            f.d + 2.0 * eps,
            f.b + 2.0 * zeta,
            f.a - f.b + 2.0 * (delta - zeta),
            f.d - f.c + 2.0 * (eps - lambda),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.a1, s * self.a2, s * self.b1, s * self.b2)
    }

    /// Coefficients of the same equation written as `A dy^2 + 2B' dx dy - A dx^2`.
    pub fn to_half_convention(&self) -> Self {
        Self::new(self.a1, self.a2, 0.5 * self.b1, 0.5 * self.b2)
    }

    pub fn max_abs(&self) -> f64 {
        [self.a1, self.a2, self.b1, self.b2].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `a1 b2 - a2 b1`; nonzero iff `A = 0` and `B = 0` cross transversally.
    pub fn transversality(&self) -> f64 {
        self.a1 * self.b2 - self.a2 * self.b1
    }

    /// Determinant of the Hessian of `B^2 - 4AC` at the origin, `16 (a1 b2 - a2 b1)^2`.
    pub fn discriminant_hessian_det(&self) -> f64 {
        let (hxx, hxy, hyy) = (
            2.0 * (self.b1 * self.b1 + 4.0 * self.a1 * self.a1),
            2.0 * (self.b1 * self.b2 + 4.0 * self.a1 * self.a2),
            2.0 * (self.b2 * self.b2 + 4.0 * self.a2 * self.a2),
        );
        hxx * hyy - hxy * hxy
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        [self.a1 - other.a1, self.a2 - other.a2, self.b1 - other.b1, self.b2 - other.b2]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// The linear BDE `A = a1 x + a2 y`, `B = b1 x + b2 y`, `C = -A` with the
/// Euclidean metric, realised as `e = B/2`, `f = A`, `g = -B/2`.
impl ScreenField for BdeOneJet {
    fn screen(&self, x: f64, y: f64) -> Result<ScreenCoefficients> {
        let a = self.a1 * x + self.a2 * y;
        let b = self.b1 * x + self.b2 * y;
        Ok(ScreenCoefficients { e: 0.5 * b, f: a, g: -0.5 * b, first: FirstFundamentalForm::IDENTITY })
    }
}

/// Richardson-extrapolated 1-jets of `A`, `B`, `C` at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericOneJet {
    pub jet: BdeOneJet,
    /// `(C_x, C_y)`, which must equal `-(A_x, A_y)`.
    pub c_gradient: [f64; 2],
}

/// Central differences of the full pipeline at the origin with one Richardson step.
pub fn numeric_one_jet(surface: &Surface, h: f64) -> Result<NumericOneJet> {
    const H_MIN: f64 = 1e-6;
    const H_MAX: f64 = 1e-2;
    if !(H_MIN..=H_MAX).contains(&h) {
        return Err(Error::InvalidStep { h, min: H_MIN, max: H_MAX });
    }
    let central = |h: f64, dx: f64, dy: f64| -> Result<[f64; 3]> {
        let p = surface.bde(h * dx, h * dy)?;
        let m = surface.bde(-h * dx, -h * dy)?;
        let s = 0.5 / h;
        Ok([(p.a - m.a) * s, (p.b - m.b) * s, (p.c - m.c) * s])
    };
    let grad = |dx: f64, dy: f64| -> Result<[f64; 3]> {
        let coarse = central(h, dx, dy)?;
        let fine = central(0.5 * h, dx, dy)?;
        Ok(std::array::from_fn(|i| (4.0 * fine[i] - coarse[i]) / 3.0))
    };
    let gx = grad(1.0, 0.0)?;
    let gy = grad(0.0, 1.0)?;
    Ok(NumericOneJet { jet: BdeOneJet::new(gx[0], gy[0], gx[1], gy[1]), c_gradient: [gx[2], gy[2]] })
}

/// The 1-jet of the principal-line equation extracted from the full pipeline,
/// after checking that the 1-jet of `C` is minus that of `A`.
pub fn bde_one_jet_numeric(surface: &Surface, h: f64) -> Result<BdeOneJet> {
    let n = numeric_one_jet(surface, h)?;
    let deviation = (n.c_gradient[0] + n.jet.a1).abs().max((n.c_gradient[1] + n.jet.a2).abs());
    if deviation > 1e-6 * n.jet.max_abs().max(1.0) {
        return Err(Error::InconsistentJet { deviation });
    }
    Ok(n.jet)
}

/// `c3 z^3 + c2 z^2 + c1 z + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberCubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl FiberCubic {
    /// `(F_x + z F_y)(0, 0, z)` for the full-`B` 1-jet: `(a2, a1 + b2, b1 - a2, -a1)`.
    pub fn from_jet(j: &BdeOneJet) -> Self {
        cubic_from_jet(j)
    }

    /// The cubic written for half-convention coefficients,
    /// `a2 z^3 + (2 b2 + a1) z^2 + (2 b1 - a2) z - a1`.
    pub fn from_half_convention(j: &BdeOneJet) -> Self {
        Self { c3: j.a2, c2: 2.0 * j.b2 + j.a1, c1: 2.0 * j.b1 - j.a2, c0: -j.a1 }
    }

    pub fn eval(&self, z: f64) -> f64 {
        ((self.c3 * z + self.c2) * z + self.c1) * z + self.c0
    }

    pub fn derivative(&self, z: f64) -> f64 {
        (3.0 * self.c3 * z + 2.0 * self.c2) * z + self.c1
    }

    pub fn scale(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0].iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn cubic_from_jet(j: &BdeOneJet) -> FiberCubic {
    FiberCubic { c3: j.a2, c2: j.a1 + j.b2, c1: j.b1 - j.a2, c0: -j.a1 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicRoot {
    pub z: f64,
    pub simple: bool,
}

/// Why the fiber cubic could not be solved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCubic {
    pub leading: f64,
    pub scale: f64,
}

impl fmt::Display for DegenerateCubic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "leading coefficient {:e} is negligible against {:e}", self.leading, self.scale)
    }
}

/// Real roots in increasing order.
///
/// Roots are eigenvalues of the companion matrix, polished by one Newton step.
/// An eigenvalue counts as real when its imaginary part is below
/// `sqrt(tol) (1 + |re|)`, so that near-double roots surface as a close pair
/// flagged non-simple instead of silently vanishing.
pub fn real_roots(c: &FiberCubic, tol: f64) -> std::result::Result<Vec<CubicRoot>, DegenerateCubic> {
    let scale = c.scale();
    if !(c.c3.abs() > tol * scale) {
        return Err(DegenerateCubic { leading: c.c3, scale });
    }
    let (p2, p1, p0) = (c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3);
    let companion = Matrix3::new(-p2, -p1, -p0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let eig = companion.complex_eigenvalues();
    let imag_tol = tol.sqrt();
    let mut zs: Vec<f64> = eig
        .iter()
        .filter(|e| e.im.abs() <= imag_tol * (1.0 + e.re.abs()))
        .map(|e| {
            let z = e.re;
            let d = c.derivative(z);
            if d != 0.0 {
                let polished = z - c.eval(z) / d;
                if polished.is_finite() && c.eval(polished).abs() <= c.eval(z).abs() {
                    return polished;
                }
            }
            z
        })
        .collect();
    zs.sort_by(f64::total_cmp);
    let span = zs.iter().fold(1.0f64, |m, z| m.max(z.abs()));
    let roots = zs
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let crowded = zs
                .iter()
                .enumerate()
                .any(|(k, &w)| k != i && (z - w).abs() < tol * span);
            let flat = c.derivative(z).abs() < tol * scale * (1.0 + z * z);
            CubicRoot { z, simple: !crowded && !flat }
        })
        .collect();
    Ok(roots)
}

/// Nonzero eigenvalues of the linearized Lie-Cartan field at `(0, 0, z)`:
/// `beta2 = b1 + (2 a1 + b2) z + 2 a2 z^2` along `(1, z, 0)` and
/// `beta3 = -f'(z)` along the fiber.
pub fn eigenvalues_at_root(j: &BdeOneJet, c: &FiberCubic, z: f64) -> (f64, f64) {
    let beta2 = j.b1 + (2.0 * j.a1 + j.b2) * z + 2.0 * j.a2 * z * z;
    (beta2, -c.derivative(z))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityKind {
    Saddle,
    Node,
    Degenerate,
}

impl SingularityKind {
    pub fn from_eigenvalues(beta2: f64, beta3: f64) -> Self {
        let p = beta2 * beta3;
        if p.abs() < HYPERBOLICITY_TOL * (beta2 * beta2 + beta3 * beta3) || p == 0.0 {
            SingularityKind::Degenerate
        } else if p < 0.0 {
            SingularityKind::Saddle
        } else {
            SingularityKind::Node
        }
    }
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularityKind::Saddle => "saddle",
            SingularityKind::Node => "node",
            SingularityKind::Degenerate => "degenerate",
        })
    }
}

/// A zero `(0, 0, z)` of the Lie-Cartan field on the fiber over the umbilic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSingularity {
    pub z: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub kind: SingularityKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UmbilicClass {
    D1,
    D2,
    D3,
    /// The 1-jet vanishes, so `B^2 - 4AC` has no nondegenerate minimum.
    NotSimple,
    NotTransversal,
    DegenerateCubic,
    /// Simple roots whose saddle/node pattern is none of the three Darbouxian ones,
    /// or a singularity with a vanishing eigenvalue.
    NonDarbouxian,
}

impl UmbilicClass {
    pub fn is_darbouxian(&self) -> bool {
        matches!(self, UmbilicClass::D1 | UmbilicClass::D2 | UmbilicClass::D3)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            UmbilicClass::D1 => "D1",
            UmbilicClass::D2 => "D2",
            UmbilicClass::D3 => "D3",
            UmbilicClass::NotSimple => "NotSimple",
            UmbilicClass::NotTransversal => "NotTransversal",
            UmbilicClass::DegenerateCubic => "DegenerateCubic",
            UmbilicClass::NonDarbouxian => "NonDarbouxian",
        }
    }
}

impl fmt::Display for UmbilicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmbilicVerdict {
    pub class: UmbilicClass,
    pub jet: BdeOneJet,
    pub cubic: FiberCubic,
    /// Fiber singularities in increasing `z`; empty when the cubic could not be solved.
    pub singularities: Vec<FiberSingularity>,
    /// `a1 b2 - a2 b1`.
    pub transversality: f64,
}

impl UmbilicVerdict {
    pub fn count(&self, kind: SingularityKind) -> usize {
        self.singularities.iter().filter(|s| s.kind == kind).count()
    }

    pub fn saddles(&self) -> impl Iterator<Item = &FiberSingularity> {
        self.singularities.iter().filter(|s| s.kind == SingularityKind::Saddle)
    }
}

/// Darbouxian classification from the 1-jet.
///
/// The fiber is a projective line, so "a node between two saddles" holds for
/// any one node among three singularities; D2 is recognised by the counts.
pub fn classify_umbilic(j: &BdeOneJet, tol: f64) -> UmbilicVerdict {
    let cubic = cubic_from_jet(j);
    let transversality = j.transversality();
    let verdict = |class, singularities| UmbilicVerdict { class, jet: *j, cubic, singularities, transversality };
    let scale = j.max_abs();
    if scale == 0.0 {
        return verdict(UmbilicClass::NotSimple, vec![]);
    }
    // with C = -A the Hessian of B^2 - 4AC is degenerate exactly when (T) fails
    if transversality.abs() < tol * scale * scale {
        return verdict(UmbilicClass::NotTransversal, vec![]);
    }
    let roots = match real_roots(&cubic, tol) {
        Ok(r) => r,
        Err(_) => return verdict(UmbilicClass::DegenerateCubic, vec![]),
    };
    let singularities: Vec<_> = roots
        .iter()
        .map(|r| {
            let (beta2, beta3) = eigenvalues_at_root(j, &cubic, r.z);
            FiberSingularity { z: r.z, beta2, beta3, kind: SingularityKind::from_eigenvalues(beta2, beta3) }
        })
        .collect();
    if roots.iter().any(|r| !r.simple) {
        return verdict(UmbilicClass::DegenerateCubic, singularities);
    }
    let saddles = singularities.iter().filter(|s| s.kind == SingularityKind::Saddle).count();
    let nodes = singularities.iter().filter(|s| s.kind == SingularityKind::Node).count();
    let class = match (singularities.len(), saddles, nodes) {
        (1, 1, 0) => UmbilicClass::D1,
        (3, 2, 1) => UmbilicClass::D2,
        (3, 3, 0) => UmbilicClass::D3,
        _ => UmbilicClass::NonDarbouxian,
    };
    verdict(class, singularities)
}

/// Lie-Cartan field `(F_z, z F_z, -(F_x + z F_y))` at `(x, y, z)`.
///
/// `F_z = 2 A z + B` is exact; `F_x`, `F_y` are central differences of the
/// full coefficient functions with step [`FIELD_STEP`].
pub fn lie_cartan_field<S: ScreenField + ?Sized>(field: &S, x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
    let p = field.bde(x, y)?;
    let fz = 2.0 * p.a * z + p.b;
    let (fx, fy) = lift_gradient(field, x, y, z)?;
    Ok([fz, z * fz, -(fx + z * fy)])
}

fn lift_value(p: &BdePoint, z: f64) -> f64 {
    (p.a * z + p.b) * z + p.c
}

fn lift_gradient<S: ScreenField + ?Sized>(field: &S, x: f64, y: f64, z: f64) -> Result<(f64, f64)> {
    let h = FIELD_STEP;
    let d = |dx: f64, dy: f64| -> Result<f64> {
        let p = field.bde(x + h * dx, y + h * dy)?;
        let m = field.bde(x - h * dx, y - h * dy)?;
        Ok((lift_value(&p, z) - lift_value(&m, z)) / (2.0 * h))
    };
    Ok((d(1.0, 0.0)?, d(0.0, 1.0)?))
}

/// `F(x, y, z) = A z^2 + B z + C`.
pub fn lift_function<S: ScreenField + ?Sized>(field: &S, x: f64, y: f64, z: f64) -> Result<f64> {
    Ok(lift_value(&field.bde(x, y)?, z))
}

/// Finite-difference Jacobian of the Lie-Cartan field at `(0, 0, z)`.
pub fn lie_cartan_jacobian<S: ScreenField + ?Sized>(field: &S, z: f64, h: f64) -> Result<Matrix3<f64>> {
    let mut jac = Matrix3::zeros();
    for col in 0..3 {
        let mut e = [0.0; 3];
        e[col] = h;
        let p = lie_cartan_field(field, e[0], e[1], z + e[2])?;
        let m = lie_cartan_field(field, -e[0], -e[1], z - e[2])?;
        for row in 0..3 {
            jac[(row, col)] = (p[row] - m[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Compares the spectrum of the finite-difference Jacobian at `(0, 0, z)` with
/// `{0, beta2, beta3}`; returns the largest deviation relative to `max(|beta2|, |beta3|)`.
pub fn numeric_linearization_check<S: ScreenField + ?Sized>(
    field: &S,
    z: f64,
    betas: (f64, f64),
    h: f64,
) -> Result<f64> {
    let jac = lie_cartan_jacobian(field, z, h)?;
    let mut eig: Vec<_> = jac.complex_eigenvalues().iter().copied().collect();
    let scale = betas.0.abs().max(betas.1.abs());
    let mut worst = 0.0f64;
    for target in [0.0, betas.0, betas.1] {
        let (idx, dist) = eig
            .iter()
            .enumerate()
            .map(|(i, e)| (i, ((e.re - target).powi(2) + e.im.powi(2)).sqrt()))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        eig.swap_remove(idx);
        worst = worst.max(dist / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::HostSurface;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn cubic_from_jet_examples() {
        // rotation host: b z^3 - c z^2 + (a - 2b) z
        let (a, b, c) = (3.0, 2.0, 1.0);
        let cubic = cubic_from_jet(&BdeOneJet::rotation_closed_form(a, b, c));
        assert_eq!((cubic.c3, cubic.c2, cubic.c1, cubic.c0), (b, -c, a - 2.0 * b, 0.0));
        let cubic = cubic_from_jet(&BdeOneJet::new(14.0, 17.0, -6.0, -6.0));
        assert_eq!((cubic.c3, cubic.c2, cubic.c1, cubic.c0), (17.0, 8.0, -23.0, -14.0));
        let cubic = cubic_from_jet(&BdeOneJet::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!((cubic.c3, cubic.c2, cubic.c1, cubic.c0), (0.0, 1.0, 0.0, -1.0));
        assert!(real_roots(&cubic, DEFAULT_TOL).is_err());
    }

    #[test]
    fn real_root_examples() {
        let roots = |a, b, c| {
            let cubic = cubic_from_jet(&BdeOneJet::rotation_closed_form(a, b, c));
            real_roots(&cubic, DEFAULT_TOL).unwrap()
        };
        let r = roots(3.0, 1.0, 0.0);
        assert_eq!(r.len(), 1);
        assert!(r[0].z.abs() < 1e-12 && r[0].simple);

        let r = roots(3.0, 2.0, 1.0);
        let zs: Vec<_> = r.iter().map(|r| r.z).collect();
        for (z, want) in zs.iter().zip([-0.5, 0.0, 1.0]) {
            assert!((z - want).abs() < 1e-12, "{zs:?}");
        }
        // closed forms z = c/2b ∓ sqrt(Δ), Δ = (c/2b)^2 - a/b + 2
        let delta: f64 = (1.0f64 / 4.0).powi(2) - 1.5 + 2.0;
        assert!((delta - 0.5625).abs() < 1e-15);

        let r = roots(1.0, 2.0, 5.0);
        for (z, want) in r.iter().map(|r| r.z).zip([-0.5, 0.0, 3.0]) {
            assert!((z - want).abs() < 1e-12);
        }
        assert!(r.iter().all(|r| r.simple));
    }

    #[test]
    fn double_root_is_not_simple() {
        // (z - 1)^2 (z + 2)
        let c = FiberCubic { c3: 1.0, c2: 0.0, c1: -3.0, c0: 2.0 };
        let r = real_roots(&c, DEFAULT_TOL).unwrap();
        assert!(r.iter().any(|r| !r.simple));
    }

    #[test]
    fn eigenvalue_examples() {
        let (a, b, c) = (3.0, 2.0, 1.0);
        let j = BdeOneJet::rotation_closed_form(a, b, c);
        let cubic = cubic_from_jet(&j);
        assert_eq!(eigenvalues_at_root(&j, &cubic, 0.0), (a - b, 2.0 * b - a));
        let (b2, b3) = eigenvalues_at_root(&j, &cubic, 1.0);
        assert!((b2 - 4.0).abs() < 1e-12 && (b3 + 3.0).abs() < 1e-12);
        let (b2, b3) = eigenvalues_at_root(&j, &cubic, -0.5);
        assert!((b2 - 2.5).abs() < 1e-12 && (b3 + 1.5).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let class = |a, b, c| classify_umbilic(&BdeOneJet::rotation_closed_form(a, b, c), DEFAULT_TOL);
        let v = class(3.0, 1.0, 0.0);
        assert_eq!(v.class, UmbilicClass::D1);
        assert_eq!(v.singularities[0].kind, SingularityKind::Saddle);

        let v = class(3.0, 2.0, 1.0);
        assert_eq!(v.class, UmbilicClass::D2);
        let kinds: Vec<_> = v.singularities.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, [SingularityKind::Saddle, SingularityKind::Node, SingularityKind::Saddle]);

        let v = class(1.0, 2.0, 5.0);
        assert_eq!(v.class, UmbilicClass::D3);
        let betas: Vec<_> = v.singularities.iter().map(|s| (s.beta2, s.beta3)).collect();
        for (got, want) in betas.iter().zip([(2.5, -3.5), (-1.0, 3.0), (20.0, -21.0)]) {
            assert!((got.0 - want.0).abs() < 1e-9 && (got.1 - want.1).abs() < 1e-9, "{betas:?}");
        }

        assert_eq!(class(2.0, 2.0, 1.0).class, UmbilicClass::NotTransversal);
        assert_eq!(classify_umbilic(&BdeOneJet::default(), DEFAULT_TOL).class, UmbilicClass::NotSimple);
        // a/b = (c/2b)^2 + 2 gives a double root
        assert_eq!(class(2.25, 1.0, 1.0).class, UmbilicClass::DegenerateCubic);
        // a/b = 2 makes z = 0 a double root
        assert_eq!(class(2.0, 1.0, 3.0).class, UmbilicClass::DegenerateCubic);
    }

    #[test]
    fn numeric_one_jet_on_rotation_hosts() {
        let (a, b, c) = (3.0, 1.0, 0.0);
        for host in HostSurface::ROTATION_HOSTS {
            let s = Surface::rotation(host, 0.4, a, b, c).unwrap();
            let j = bde_one_jet_numeric(&s, DEFAULT_JET_STEP).unwrap();
            assert!(j.max_deviation(&BdeOneJet::new(0.0, 1.0, 2.0, 0.0)) < 1e-8, "{host}: {j:?}");
        }
    }

    #[test]
    fn numeric_one_jet_on_a_graph_host() {
        // values frozen from an independent symbolic/numeric evaluation of the
        // same construction (sympy 3-jets, numpy frame solve, central differences)
        let f = FJet { f0: 0.0, a: 1.0, d: 2.0, b: 3.0, c: 4.0 };
        let g = CubicForm::new(5.0, 6.0, 7.0, 8.0);
        for (k, gxx, gyy) in [(0.7, 0.3, -0.2), (0.0, 0.0, 0.0), (1.5, 1.5, 1.5)] {
            let s = Surface::generic(k, gxx, gyy, f, g);
            let j = bde_one_jet_numeric(&s, DEFAULT_JET_STEP).unwrap();
            assert!(j.max_deviation(&BdeOneJet::new(7.0, 8.5, -3.0, -3.0)) < 1e-6, "{j:?}");
            // proportional to the published dependence with factor 1/2
            let published = BdeOneJet::graph_closed_form(&f, &g);
            assert_eq!(published, BdeOneJet::new(14.0, 17.0, -6.0, -6.0));
            assert!(j.max_deviation(&published.scale(0.5)) < 1e-6);
        }
    }

    #[test]
    fn numeric_one_jet_rejects_bad_steps() {
        let s = Surface::rotation(HostSurface::LightCone3, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(bde_one_jet_numeric(&s, 0.5), Err(Error::InvalidStep { .. })));
    }

    #[test]
    fn lie_cartan_field_on_the_fiber() {
        let s = Surface::rotation(HostSurface::LightCone3, 0.2, 3.0, 2.0, 1.0).unwrap();
        for z in [-2.0, 0.3, 5.0] {
            let x = lie_cartan_field(&s, 0.0, 0.0, z).unwrap();
            assert!(x[0].abs() < 1e-14 && x[1].abs() < 1e-14);
        }
        for z in [-0.5, 0.0, 1.0] {
            let x = lie_cartan_field(&s, 0.0, 0.0, z).unwrap();
            assert!(x.iter().all(|c| c.abs() < 1e-6), "{z}: {x:?}");
        }
    }

    #[test]
    fn lie_cartan_projection_follows_the_line_field() {
        let s = Surface::rotation(HostSurface::NullCylinder, 0.3, 1.0, 2.0, 5.0).unwrap();
        let (x, y) = (0.05, -0.03);
        let p = s.bde(x, y).unwrap();
        let disc = p.discriminant().sqrt();
        for z in [(-p.b + disc) / (2.0 * p.a), (-p.b - disc) / (2.0 * p.a)] {
            let v = lie_cartan_field(&s, x, y, z).unwrap();
            // (dx, dy) = F_z (1, z)
            let angle = (v[1] - z * v[0]).abs() / (v[0].hypot(v[1]) * (1.0 + z * z).sqrt());
            assert!(angle < 1e-5);
        }
    }

    #[test]
    fn linearization_matches_analytic_eigenvalues() {
        let cases = [
            (HostSurface::LightCone3, (3.0, 1.0, 0.0), 0.0, (2.0, -1.0)),
            (HostSurface::NullCylinder, (3.0, 2.0, 1.0), 1.0, (4.0, -3.0)),
            (HostSurface::NullHyperplane, (1.0, 2.0, 5.0), 0.0, (-1.0, 3.0)),
        ];
        for (host, (a, b, c), z, betas) in cases {
            let s = Surface::rotation(host, 0.25, a, b, c).unwrap();
            let dev = numeric_linearization_check(&s, z, betas, 1e-4).unwrap();
            assert!(dev < 1e-4, "{host} z={z}: {dev}");
        }
    }

    #[test]
    fn half_convention_cubic_identity() {
        let j = BdeOneJet::new(0.3, -1.2, 2.0, 0.7);
        let ours = cubic_from_jet(&j);
        let theirs = FiberCubic::from_half_convention(&j.to_half_convention());
        assert_eq!(ours, theirs);
    }

    fn jet() -> impl Strategy<Value = BdeOneJet> {
        prop::array::uniform4(-5.0..5.0f64).prop_map(|v| BdeOneJet::new(v[0], v[1], v[2], v[3]))
    }

    proptest! {
        #[test]
        fn half_convention_round_trip(j in jet()) {
            let ours = cubic_from_jet(&j);
            let theirs = FiberCubic::from_half_convention(&j.to_half_convention());
            prop_assert!((ours.c3 - theirs.c3).abs() < 1e-12);
            prop_assert!((ours.c2 - theirs.c2).abs() < 1e-12);
            prop_assert!((ours.c1 - theirs.c1).abs() < 1e-12);
            prop_assert!((ours.c0 - theirs.c0).abs() < 1e-12);
        }

        #[test]
        fn root_residuals_are_small(j in jet()) {
            let c = cubic_from_jet(&j);
            if let Ok(roots) = real_roots(&c, DEFAULT_TOL) {
                for r in roots {
                    prop_assert!(c.eval(r.z).abs() < 1e-10 * (1.0 + c.norm()) * (1.0 + r.z.abs()).powi(3));
                }
            }
        }

        #[test]
        fn verdict_is_scale_invariant(j in jet(), s in 0.01..100.0f64) {
            let v = classify_umbilic(&j, DEFAULT_TOL);
            let w = classify_umbilic(&j.scale(s), DEFAULT_TOL);
            prop_assert_eq!(v.class, w.class);
        }

        #[test]
        fn hessian_of_discriminant_tracks_transversality(j in jet()) {
            let t = j.transversality();
            prop_assert!((j.discriminant_hessian_det() - 16.0 * t * t).abs() < 1e-9 * (1.0 + j.max_abs().powi(4)));
        }
    }

    #[test]
    fn closed_form_roots_match_on_random_rotation_parameters() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let mut checked = 0;
        while checked < 500 {
            let (a, b, c): (f64, f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            if b.abs() < 0.05 {
                continue;
            }
            let delta = (c / (2.0 * b)).powi(2) - a / b + 2.0;
            if delta.abs() < 1e-6 {
                continue;
            }
            let roots = real_roots(&cubic_from_jet(&BdeOneJet::rotation_closed_form(a, b, c)), DEFAULT_TOL).unwrap();
            let got: Vec<_> = roots.iter().map(|r| r.z).collect();
            let want = if delta < 0.0 {
                vec![0.0]
            } else {
                let m = c / (2.0 * b);
                sorted(vec![0.0, m - delta.sqrt(), m + delta.sqrt()])
            };
            assert_eq!(got.len(), want.len(), "{a} {b} {c}");
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-8, "{a} {b} {c}: {got:?} {want:?}");
            }
            checked += 1;
        }
    }
}
