//! Spacelike surfaces inside null hypersurfaces of Minkowski 4-space.
//!
//! Every host is written as `Phi(x, y) = P(x, y) + g(x, y) xi(x, y)` where `P`
//! sweeps a spacelike section of the host and `xi` is its null generator. The
//! height function `g` and, for graph hosts, the graph function `f` are cubic
//! polynomials equal to their 3-jets at the origin, so every derivative the
//! pipeline needs is exact. The umbilic sits at the origin by construction:
//! the quadratic part of `g` is forced so that the screen second fundamental
//! form at `(0, 0)` equals `k` times the metric.

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::minkowski::SpacetimeVector;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Minimum distance kept from the boundary of the light cone and cylinder charts.
pub const DOMAIN_MARGIN: f64 = 1e-6;

/// Cubic terms `xxx/6 x^3 + xxy/2 x^2 y + xyy/2 x y^2 + yyy/6 y^3`.
///
/// The coefficients are the third partial derivatives at the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CubicForm {
    pub xxx: f64,
    pub xxy: f64,
    pub xyy: f64,
    pub yyy: f64,
}

impl CubicForm {
    pub const fn new(xxx: f64, xxy: f64, xyy: f64, yyy: f64) -> Self {
        Self { xxx, xxy, xyy, yyy }
    }
}

/// Bivariate polynomial of degree at most three, `sum c[i][j] x^i y^j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Poly3 {
    c: [[f64; 4]; 4],
}

impl Poly3 {
    /// `c0 + hxx/2 x^2 + hyy/2 y^2 + cubic`.
    pub fn from_jet(c0: f64, hxx: f64, hyy: f64, cubic: CubicForm) -> Self {
        let mut c = [[0.0; 4]; 4];
        c[0][0] = c0;
        c[2][0] = hxx / 2.0;
        c[0][2] = hyy / 2.0;
        c[3][0] = cubic.xxx / 6.0;
        c[2][1] = cubic.xxy / 2.0;
        c[1][2] = cubic.xyy / 2.0;
        c[0][3] = cubic.yyy / 6.0;
        Self { c }
    }

    pub fn partial_x(&self) -> Self {
        let mut c = [[0.0; 4]; 4];
        for i in 1..4 {
            for j in 0..4 {
                c[i - 1][j] = i as f64 * self.c[i][j];
            }
        }
        Self { c }
    }

    pub fn partial_y(&self) -> Self {
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 1..4 {
                c[i][j - 1] = j as f64 * self.c[i][j];
            }
        }
        Self { c }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 - i {
                s += self.c[i][j] * x.powi(i as i32) * y.powi(j as i32);
            }
        }
        s
    }

    /// Exact 2-jet at `(x, y)`.
    pub fn jet(&self, x: f64, y: f64) -> Jet2 {
        let (px, py) = (self.partial_x(), self.partial_y());
        Jet2 {
            v: self.eval(x, y),
            dx: px.eval(x, y),
            dy: py.eval(x, y),
            dxx: px.partial_x().eval(x, y),
            dxy: px.partial_y().eval(x, y),
            dyy: py.partial_y().eval(x, y),
        }
    }
}

/// Cubic part of the graph function `f` of a generic null hypersurface.
///
/// `f(x, y) = f0 + (k - gxx) x^2 + (k - gyy) y^2 + a/6 x^3 + d/2 x^2 y + b/2 x y^2 + c/6 y^3`,
/// the quadratic part being forced by umbilicity at the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FJet {
    pub f0: f64,
    pub a: f64,
    pub d: f64,
    pub b: f64,
    pub c: f64,
}

impl FJet {
    pub fn cubic(&self) -> CubicForm {
        CubicForm::new(self.a, self.d, self.b, self.c)
    }
}

/// The null hypersurface hosting the surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HostSurface {
    /// `f = 0`, `xi = (1, 0, 0, 1)`.
    NullHyperplane,
    /// The light cone, `Phi = (1 + g)(1, x, y, sqrt(1 - x^2 - y^2))` on the unit disk.
    LightCone3,
    /// Cylinder over a 2-dimensional light cone, `xi = (1, x, 0, sqrt(1 - x^2))` on `(-1, 1) x R`.
    NullCylinder,
    /// Graph host with `xi = (1, N)`, `N` the unit normal of the graph of `f`.
    GenericGraph(FJet),
}

impl HostSurface {
    pub const ROTATION_HOSTS: [HostSurface; 3] =
        [HostSurface::LightCone3, HostSurface::NullHyperplane, HostSurface::NullCylinder];

    pub fn name(&self) -> &'static str {
        match self {
            HostSurface::NullHyperplane => "null-plane",
            HostSurface::LightCone3 => "light-cone",
            HostSurface::NullCylinder => "cylinder",
            HostSurface::GenericGraph(_) => "generic",
        }
    }

    pub fn is_rotation(&self) -> bool {
        !matches!(self, HostSurface::GenericGraph(_))
    }

    /// Rejects points outside the chart or within [`DOMAIN_MARGIN`] of its boundary.
    pub fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        let inside = x.is_finite()
            && y.is_finite()
            && match self {
                HostSurface::LightCone3 => x.hypot(y) < 1.0 - DOMAIN_MARGIN,
                HostSurface::NullCylinder => x.abs() < 1.0 - DOMAIN_MARGIN,
                _ => true,
            };
        if inside {
            Ok(())
        } else {
            Err(Error::OutsideDomain { host: self.name(), x, y, margin: DOMAIN_MARGIN })
        }
    }
}

impl fmt::Display for HostSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HostSurface {
    type Err = Error;

    /// Parses a rotation host name; the generic host needs its `f` coefficients
    /// and is built through [`Surface::generic`].
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "null-plane" | "plane" | "null-hyperplane" => Ok(HostSurface::NullHyperplane),
            "light-cone" | "cone" => Ok(HostSurface::LightCone3),
            "cylinder" | "null-cylinder" => Ok(HostSurface::NullCylinder),
            "generic" => Ok(HostSurface::GenericGraph(FJet::default())),
            other => Err(Error::InvalidParameter(format!("unknown host `{other}`"))),
        }
    }
}

/// Jet data of the height function `g` at the umbilic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GJet {
    /// Principal curvature at the umbilic.
    pub k: f64,
    pub gxx: f64,
    pub gyy: f64,
    pub cubic: CubicForm,
}

impl GJet {
    /// Height jet on a rotation host, `a/6 x^3 + b/2 x y^2 + c/6 y^3` plus the forced quadratic part.
    pub fn rotation(host: HostSurface, k: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        let (gxx, gyy) = match host {
            HostSurface::LightCone3 => (k + 0.5, k + 0.5),
            HostSurface::NullHyperplane => (k, k),
            HostSurface::NullCylinder => (k + 0.5, k),
            HostSurface::GenericGraph(_) => {
                return Err(Error::WrongHost { expected: "rotation", got: host.name() })
            }
        };
        Ok(Self { k, gxx, gyy, cubic: CubicForm::new(a, 0.0, b, c) })
    }
}

/// A spacelike surface with an umbilic at the origin of its chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    host: HostSurface,
    g: GJet,
}

impl Surface {
    pub fn rotation(host: HostSurface, k: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        Ok(Self { host, g: GJet::rotation(host, k, a, b, c)? })
    }

    /// Surface in a generic graph host. `g` carries `(delta, epsilon, zeta, lambda)`
    /// as `(xxx, xxy, xyy, yyy)`.
    pub fn generic(k: f64, gxx: f64, gyy: f64, f: FJet, g: CubicForm) -> Self {
        Self { host: HostSurface::GenericGraph(f), g: GJet { k, gxx, gyy, cubic: g } }
    }

    pub fn host(&self) -> HostSurface {
        self.host
    }

    pub fn g(&self) -> &GJet {
        &self.g
    }

    pub fn k(&self) -> f64 {
        self.g.k
    }

    /// `(a, b, c)` for rotation hosts.
    pub fn rotation_params(&self) -> Option<(f64, f64, f64)> {
        self.host
            .is_rotation()
            .then_some((self.g.cubic.xxx, self.g.cubic.xyy, self.g.cubic.yyy))
    }

    fn height(&self) -> Poly3 {
        Poly3::from_jet(0.0, self.g.gxx, self.g.gyy, self.g.cubic)
    }

    fn graph(&self, f: &FJet) -> Poly3 {
        let k = self.g.k;
        Poly3::from_jet(f.f0, 2.0 * (k - self.g.gxx), 2.0 * (k - self.g.gyy), f.cubic())
    }

    /// Jets of the immersion and of the null generator at `(x, y)`.
    pub fn immersion_point(&self, x: f64, y: f64) -> Result<SurfaceJet> {
        self.host.check_domain(x, y)?;
        let (jx, jy) = (Jet2::var_x(x), Jet2::var_y(y));
        let one = Jet2::constant(1.0);
        let zero = Jet2::constant(0.0);
        let g = self.height().jet(x, y);
        let (phi, xi) = match self.host {
            HostSurface::NullHyperplane => {
                ([one + g, jx, jy, g], [one, zero, zero, one])
            }
            HostSurface::LightCone3 => {
                let r = (1.0 - jx * jx - jy * jy).sqrt()?;
                let s = one + g;
                ([s, s * jx, s * jy, s * r], [one, jx, jy, r])
            }
            HostSurface::NullCylinder => {
                let r = (1.0 - jx * jx).sqrt()?;
                ([one + g, jx + g * jx, jy, r + g * r], [one, jx, zero, r])
            }
            HostSurface::GenericGraph(ref fj) => {
                let f = self.graph(fj);
                let fx = f.partial_x().jet(x, y);
                let fy = f.partial_y().jet(x, y);
                let inv = (one + fx * fx + fy * fy).sqrt()?.recip()?;
                let xi = [one, -(fx * inv), -(fy * inv), inv];
                let phi = [one + g * xi[0], jx + g * xi[1], jy + g * xi[2], f.jet(x, y) + g * xi[3]];
                (phi, xi)
            }
        };
        Ok(SurfaceJet::from_components(&phi, &xi))
    }

    pub fn xi_at(&self, x: f64, y: f64) -> Result<SpacetimeVector> {
        match self.host {
            HostSurface::GenericGraph(_) => Ok(self.immersion_point(x, y)?.xi),
            ref host => xi_at(host, x, y),
        }
    }
}

/// The null generator `xi` of a rotation host at `(x, y)`.
///
/// On a generic graph host `xi` depends on the forced quadratic part of `f`,
/// which needs the height jet; use [`Surface::xi_at`] there.
pub fn xi_at(host: &HostSurface, x: f64, y: f64) -> Result<SpacetimeVector> {
    host.check_domain(x, y)?;
    match host {
        HostSurface::NullHyperplane => Ok(SpacetimeVector::new(1.0, 0.0, 0.0, 1.0)),
        HostSurface::LightCone3 => Ok(SpacetimeVector::new(1.0, x, y, (1.0 - x * x - y * y).sqrt())),
        HostSurface::NullCylinder => Ok(SpacetimeVector::new(1.0, x, 0.0, (1.0 - x * x).sqrt())),
        HostSurface::GenericGraph(_) => Err(Error::WrongHost { expected: "rotation", got: host.name() }),
    }
}

/// Value and partial derivatives up to order two of the immersion at one point,
/// plus the null generator and its first partials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceJet {
    pub phi: SpacetimeVector,
    pub phi_x: SpacetimeVector,
    pub phi_y: SpacetimeVector,
    pub phi_xx: SpacetimeVector,
    pub phi_xy: SpacetimeVector,
    pub phi_yy: SpacetimeVector,
    pub xi: SpacetimeVector,
    pub xi_x: SpacetimeVector,
    pub xi_y: SpacetimeVector,
}

impl SurfaceJet {
    fn from_components(phi: &[Jet2; 4], xi: &[Jet2; 4]) -> Self {
        let pick = |c: &[Jet2; 4], f: fn(&Jet2) -> f64| SpacetimeVector(std::array::from_fn(|i| f(&c[i])));
        Self {
            phi: pick(phi, |j| j.v),
            phi_x: pick(phi, |j| j.dx),
            phi_y: pick(phi, |j| j.dy),
            phi_xx: pick(phi, |j| j.dxx),
            phi_xy: pick(phi, |j| j.dxy),
            phi_yy: pick(phi, |j| j.dyy),
            xi: pick(xi, |j| j.v),
            xi_x: pick(xi, |j| j.dx),
            xi_y: pick(xi, |j| j.dy),
        }
    }
}

/// Coefficients `E, F, G` of the induced metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstFundamentalForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FirstFundamentalForm {
    pub const IDENTITY: Self = Self { e: 1.0, f: 0.0, g: 1.0 };

    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// `I(u, v)` for chart vectors `u`, `v`.
    pub fn pair(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.e * u[0] * v[0] + self.f * (u[0] * v[1] + u[1] * v[0]) + self.g * u[1] * v[1]
    }
}

pub fn first_fundamental_form(j: &SurfaceJet) -> Result<FirstFundamentalForm> {
    let form = FirstFundamentalForm {
        e: j.phi_x.dot(&j.phi_x),
        f: j.phi_x.dot(&j.phi_y),
        g: j.phi_y.dot(&j.phi_y),
    };
    let det = form.det();
    // relative to the Euclidean size of the tangents, which stays O(1) when the induced metric collapses
    let scale = (j.phi_x.euclidean_norm() * j.phi_y.euclidean_norm()).powi(2);
    if det > 1e-12 * scale && form.e > 0.0 {
        Ok(form)
    } else {
        Err(Error::DegenerateMetric { det })
    }
}
