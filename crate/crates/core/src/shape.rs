//! Screen second fundamental form, the shape operator `A_eta`, and the
//! coefficients of the binary differential equation of principal lines.

use crate::error::{Error, Result};
use crate::frame::{solve_eta, NullFrame};
use crate::surfaces::{first_fundamental_form, FirstFundamentalForm, HostSurface, Surface, SurfaceJet};
use serde::{Deserialize, Serialize};

/// `e = <Phi_xx, eta>`, `f = <Phi_xy, eta>`, `g = <Phi_yy, eta>` and the metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenCoefficients {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub first: FirstFundamentalForm,
}

impl ScreenCoefficients {
    /// Second fundamental form `II(u, v)` for chart vectors.
    pub fn second(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.e * u[0] * v[0] + self.f * (u[0] * v[1] + u[1] * v[0]) + self.g * u[1] * v[1]
    }

    /// Normal curvature `II(v,v) / I(v,v)` of a chart direction.
    pub fn normal_curvature(&self, v: [f64; 2]) -> f64 {
        self.second(v, v) / self.first.pair(v, v)
    }
}

/// `A dy^2 + B dx dy + C dx^2 = 0`, unnormalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BdePoint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BdePoint {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    /// `A E - B F + C G`; zero whenever the two solution directions are orthogonal.
    pub fn orthogonality_residual(&self, first: &FirstFundamentalForm) -> f64 {
        self.a * first.e - self.b * first.f + self.c * first.g
    }
}

/// Matrix of `A_eta` in the basis `(Phi_x, Phi_y)`:
/// `A_eta Phi_x = a11 Phi_x + a21 Phi_y`, `A_eta Phi_y = a12 Phi_x + a22 Phi_y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl ShapeMatrix {
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }
}

pub fn screen_coefficients(j: &SurfaceJet, frame: &NullFrame) -> Result<ScreenCoefficients> {
    Ok(ScreenCoefficients {
        e: j.phi_xx.dot(&frame.eta),
        f: j.phi_xy.dot(&frame.eta),
        g: j.phi_yy.dot(&frame.eta),
        first: first_fundamental_form(j)?,
    })
}

/// Evaluates the whole chain `Phi -> eta -> (e, f, g; E, F, G)` at a point.
pub fn screen_at(surface: &Surface, x: f64, y: f64) -> Result<ScreenCoefficients> {
    let j = surface.immersion_point(x, y)?;
    let frame = solve_eta(&j)?;
    screen_coefficients(&j, &frame)
}

pub fn shape_matrix(s: &ScreenCoefficients) -> Result<ShapeMatrix> {
    let FirstFundamentalForm { e: ee, f: ff, g: gg } = s.first;
    let det = ee * gg - ff * ff;
    if !(det > 0.0) {
        return Err(Error::DegenerateMetric { det });
    }
    // [E F; F G] [a11 a12; a21 a22] = [e f; f g]
    Ok(ShapeMatrix {
        a11: (gg * s.e - ff * s.f) / det,
        a21: (ee * s.f - ff * s.e) / det,
        a12: (gg * s.f - ff * s.g) / det,
        a22: (ee * s.g - ff * s.f) / det,
    })
}

/// Eigenvalues `k1 <= k2` of the shape matrix.
pub fn principal_curvatures(m: &ShapeMatrix, s: &ScreenCoefficients) -> (f64, f64) {
    let half_trace = 0.5 * (m.a11 + m.a22);
    let half_gap = 0.5 * (m.a11 - m.a22);
    let mut disc = half_gap * half_gap + m.a12 * m.a21;
    let scale = m.a11.abs().max(m.a12.abs()).max(m.a21.abs()).max(m.a22.abs()).max(s.e.abs()).max(1.0);
    if disc < 0.0 && disc > -1e-12 * scale * scale {
        disc = 0.0;
    }
    let r = disc.max(0.0).sqrt();
    (half_trace - r, half_trace + r)
}

/// `A = fG - gF`, `B = eG - gE`, `C = -(fE - eF)`.
pub fn bde_at(s: &ScreenCoefficients) -> BdePoint {
    let FirstFundamentalForm { e: ee, f: ff, g: gg } = s.first;
    BdePoint { a: s.f * gg - s.g * ff, b: s.e * gg - s.g * ee, c: -(s.f * ee - s.e * ff) }
}

/// BDE coefficients of the surface at `(x, y)`.
pub fn bde_field(surface: &Surface, x: f64, y: f64) -> Result<BdePoint> {
    Ok(bde_at(&screen_at(surface, x, y)?))
}

/// Anything that yields screen coefficients over a chart: a configured surface,
/// or a synthetic field used to exercise the integrators.
pub trait ScreenField {
    fn screen(&self, x: f64, y: f64) -> Result<ScreenCoefficients>;

    fn bde(&self, x: f64, y: f64) -> Result<BdePoint> {
        Ok(bde_at(&self.screen(x, y)?))
    }
}

impl ScreenField for Surface {
    fn screen(&self, x: f64, y: f64) -> Result<ScreenCoefficients> {
        screen_at(self, x, y)
    }
}

/// Spatially constant coefficients over the whole plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField(pub ScreenCoefficients);

impl ScreenField for ConstantField {
    fn screen(&self, _x: f64, _y: f64) -> Result<ScreenCoefficients> {
        Ok(self.0)
    }
}

/// Largest `|A|, |B|, |C|` of the `xi`-screen operator over `samples` points of
/// the disk of radius 0.5, for a surface in the light cone.
///
/// The `xi`-coefficients are `e* = -<xi_x, Phi_x>`, `f* = -<xi_x, Phi_y>`,
/// `g* = -<xi_y, Phi_y>`, following `nabla_X xi = -A*_xi X + ...`.
pub fn xi_umbilicity_deviation(surface: &Surface, samples: usize) -> Result<f64> {
    if surface.host() != HostSurface::LightCone3 {
        return Err(Error::WrongHost { expected: "light-cone", got: surface.host().name() });
    }
    let mut worst = 0.0f64;
    for i in 0..samples {
        // deterministic golden-angle spiral over the disk
        let t = (i as f64 + 0.5) / samples as f64;
        let r = 0.5 * t.sqrt();
        let th = i as f64 * 2.399_963_229_728_653;
        let j = surface.immersion_point(r * th.cos(), r * th.sin())?;
        let star = ScreenCoefficients {
            e: -j.xi_x.dot(&j.phi_x),
            f: -j.xi_x.dot(&j.phi_y),
            g: -j.xi_y.dot(&j.phi_y),
            first: first_fundamental_form(&j)?,
        };
        worst = worst.max(bde_at(&star).max_abs());
    }
    Ok(worst)
}
