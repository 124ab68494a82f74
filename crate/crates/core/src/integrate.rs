//! Integral curves of the two principal foliations, the Lie-Cartan lift near
//! the umbilic, umbilical separatrices, and portrait assembly.
//!
//! Away from the umbilic the line fields are continued directly. Close to it
//! they are ill-conditioned, so separatrices start on the lift, where the
//! Lie-Cartan field is an honest vector field, and hand over to direct
//! continuation at a fixed radius.

use crate::error::{Error, Result};
use crate::lie_cartan::{bde_one_jet_numeric, classify_umbilic, lie_cartan_field, FiberSingularity, SingularityKind, UmbilicVerdict, DEFAULT_JET_STEP, DEFAULT_TOL};
use crate::shape::{BdePoint, ScreenCoefficients, ScreenField};
use crate::surfaces::{FirstFundamentalForm, Surface};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

/// Local error tolerance of the embedded 3(2) pair.
pub const DEFAULT_STEP_TOL: f64 = 1e-8;
/// Lifted trajectories are abandoned once `|F|` exceeds this after projection.
pub const LIFT_DRIFT_ABORT: f64 = 1e-4;
/// Largest `|F|` accepted at a lifted seed.
pub const LIFT_SEED_TOL: f64 = 1e-6;
/// Largest heading change accepted in one step; sharper turns mean the curve ran into an umbilic.
pub const MAX_TURN: f64 = 0.5;
/// Offset of separatrix seeds from a fiber saddle along `(1, z, 0)`.
pub const SEPARATRIX_OFFSET: f64 = 1e-4;

/// Principal foliation. `One` carries the smaller normal curvature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    One,
    Two,
}

impl Family {
    pub const BOTH: [Family; 2] = [Family::One, Family::Two];

    pub fn index(&self) -> u8 {
        match self {
            Family::One => 1,
            Family::Two => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(Family::One),
            "2" => Ok(Family::Two),
            other => Err(format!("unknown family '{other}' (expected 1 or 2)")),
        }
    }
}

/// Unit chart directions of the two principal foliations at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionPair {
    pub one: [f64; 2],
    pub two: [f64; 2],
}

impl DirectionPair {
    pub fn get(&self, family: Family) -> [f64; 2] {
        match family {
            Family::One => self.one,
            Family::Two => self.two,
        }
    }

    /// `I(d1, d2) / (|d1|_I |d2|_I)`.
    pub fn orthogonality_residual(&self, first: &FirstFundamentalForm) -> f64 {
        let (u, v) = (self.one, self.two);
        first.pair(u, v).abs() / (first.pair(u, u) * first.pair(v, v)).sqrt()
    }
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Solves `A dy^2 + B dx dy + C dx^2 = 0`.
///
/// With `q = -(B + sgn(B) sqrt(B^2 - 4AC)) / 2` the solutions are `(A, q)`
/// (slope `m = q/A`, the `z = dy/dx` chart) and `(q, C)` (`w = C/q`, the
/// `w = dx/dy` chart); neither divides by a small coefficient, so no explicit
/// chart switch is needed.
pub fn principal_directions(p: &BdePoint, s: &ScreenCoefficients) -> Result<DirectionPair> {
    let scale = p.max_abs();
    let size = s.e.abs() + s.f.abs() + s.g.abs() + s.first.e.abs() + s.first.g.abs();
    let umbilic = || Error::UmbilicPoint { x: f64::NAN, y: f64::NAN };
    if !(scale > 1e-14 * size * size) {
        return Err(umbilic());
    }
    let d = p.discriminant().max(0.0).sqrt();
    let q = -0.5 * (p.b + d.copysign(p.b));
    let (u, v) = ([p.a, q], [q, p.c]);
    if !(norm(u) > 1e-14 * scale && norm(v) > 1e-14 * scale) {
        return Err(umbilic());
    }
    let (u, v) = (unit(u), unit(v));
    let (ku, kv) = (s.normal_curvature(u), s.normal_curvature(v));
    Ok(if ku <= kv { DirectionPair { one: u, two: v } } else { DirectionPair { one: v, two: u } })
}

/// [`principal_directions`] of a field at a chart point.
pub fn principal_directions_at<S: ScreenField + ?Sized>(field: &S, x: f64, y: f64) -> Result<DirectionPair> {
    let s = field.screen(x, y)?;
    principal_directions(&crate::shape::bde_at(&s), &s).map_err(|e| match e {
        Error::UmbilicPoint { .. } => Error::UmbilicPoint { x, y },
        e => e,
    })
}

/// One Bogacki-Shampine step: third-order solution and the 3(2) error estimate.
fn bs32_step<const N: usize>(
    f: &mut impl FnMut(&[f64; N]) -> Result<[f64; N]>,
    y: &[f64; N],
    h: f64,
) -> Result<([f64; N], f64)> {
    let at = |ks: &[(&[f64; N], f64)]| -> [f64; N] {
        std::array::from_fn(|i| y[i] + h * ks.iter().map(|(k, w)| w * k[i]).sum::<f64>())
    };
    let k1 = f(y)?;
    let k2 = f(&at(&[(&k1, 0.5)]))?;
    let k3 = f(&at(&[(&k2, 0.75)]))?;
    let y3 = at(&[(&k1, 2.0 / 9.0), (&k2, 1.0 / 3.0), (&k3, 4.0 / 9.0)]);
    let k4 = f(&y3)?;
    let y2 = at(&[(&k1, 7.0 / 24.0), (&k2, 0.25), (&k3, 1.0 / 3.0), (&k4, 0.125)]);
    let err = (0..N).map(|i| (y3[i] - y2[i]).powi(2)).sum::<f64>().sqrt();
    Ok((y3, err))
}

fn step_factor(err: f64, tol: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * (tol / err).cbrt()).clamp(0.2, 5.0)
    }
}

/// Errors that mean "the curve cannot go further this way" rather than a fault.
fn is_terminal(e: &Error) -> bool {
    matches!(
        e,
        Error::OutsideDomain { .. }
            | Error::DegenerateMetric { .. }
            | Error::RankDeficient { .. }
            | Error::UmbilicPoint { .. }
            | Error::Jet(_)
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxLength,
    /// Left the disk the caller bounded the curve to.
    Bound,
    /// The chart or the geometry gave out (host domain edge, degenerate metric).
    Domain,
    /// Entered the exclusion disk around the umbilic, or ran into another one.
    Umbilic,
    StepUnderflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Largest and initial step.
    pub max_step: f64,
    pub min_step: f64,
    pub tol: f64,
    pub max_len: f64,
    /// Stop on leaving the disk of this radius about the chart origin.
    pub bound: Option<f64>,
    /// Stop when moving inward within this distance of the origin; defaults to `10 max_step`.
    pub umbilic_radius: Option<f64>,
}

impl CurveOptions {
    pub fn new(max_step: f64, max_len: f64) -> Self {
        Self { max_step, min_step: 1e-12, tol: DEFAULT_STEP_TOL, max_len, bound: None, umbilic_radius: None }
    }

    fn umbilic_radius(&self) -> f64 {
        self.umbilic_radius.unwrap_or(10.0 * self.max_step)
    }
}

/// An integral curve of one principal foliation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub family: Family,
    pub points: Vec<[f64; 2]>,
    /// Arc length parameter reached.
    pub length: f64,
    pub stop: StopReason,
}

/// Continues the `family` line field from `seed`.
///
/// Line fields carry no orientation, so every evaluation picks the sign with
/// positive dot against the last accepted heading; `heading` fixes the
/// initial one (any sign if absent).
pub fn integrate_curve<S: ScreenField + ?Sized>(
    field: &S,
    seed: [f64; 2],
    family: Family,
    heading: Option<[f64; 2]>,
    opts: &CurveOptions,
) -> Result<Polyline> {
    if !(opts.max_step > 0.0) || !(opts.max_len >= 0.0) {
        return Err(Error::InvalidParameter(format!("step {} and length {} must be positive", opts.max_step, opts.max_len)));
    }
    let mut dir = principal_directions_at(field, seed[0], seed[1])?.get(family);
    if let Some(hd) = heading {
        if dot(dir, hd) < 0.0 {
            dir = [-dir[0], -dir[1]];
        }
    }
    let bound = opts.bound.map(|b| b * (1.0 + 1e-12));
    let umbilic_radius = opts.umbilic_radius();
    let mut y = seed;
    let mut points = vec![seed];
    let mut length = 0.0;
    let mut h = opts.max_step;
    let stop = loop {
        if length >= opts.max_len {
            break StopReason::MaxLength;
        }
        let h_try = h.min(opts.max_len - length);
        let reference = dir;
        let mut f = |p: &[f64; 2]| -> Result<[f64; 2]> {
            let d = principal_directions_at(field, p[0], p[1])?.get(family);
            Ok(if dot(d, reference) < 0.0 { [-d[0], -d[1]] } else { d })
        };
        let (next, err) = match bs32_step(&mut f, &y, h_try) {
            Ok(r) => r,
            Err(e) if is_terminal(&e) => {
                if h_try <= opts.min_step {
                    break if matches!(e, Error::UmbilicPoint { .. }) { StopReason::Umbilic } else { StopReason::Domain };
                }
                h = 0.25 * h_try;
                continue;
            }
            Err(e) => return Err(e),
        };
        if err > opts.tol && h_try > opts.min_step {
            h = (h_try * step_factor(err, opts.tol)).max(opts.min_step);
            continue;
        }
        let chord = [next[0] - y[0], next[1] - y[1]];
        if norm(chord) == 0.0 {
            break StopReason::StepUnderflow;
        }
        if let Some(b) = bound {
            if norm(next) > b {
                // clip to the circle along the last chord
                let t = circle_exit(y, chord, b / (1.0 + 1e-12));
                points.push([y[0] + t * chord[0], y[1] + t * chord[1]]);
                length += t * h_try;
                break StopReason::Bound;
            }
        }
        let turned = unit(chord);
        if dot(turned, dir) < MAX_TURN.cos() {
            // the line field flips only across a singular point
            break StopReason::Umbilic;
        }
        dir = turned;
        length += h_try;
        let inward = norm(next) < norm(y);
        y = next;
        points.push(y);
        if inward && norm(y) < umbilic_radius {
            break StopReason::Umbilic;
        }
        h = (h_try * step_factor(err, opts.tol)).min(opts.max_step);
    };
    Ok(Polyline { family, points, length, stop })
}

/// Parameter `t` in `[0, 1]` where `p + t d` meets the circle of radius `r`.
fn circle_exit(p: [f64; 2], d: [f64; 2], r: f64) -> f64 {
    let (a, b, c) = (dot(d, d), 2.0 * dot(p, d), dot(p, p) - r * r);
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    ((-b + disc) / (2.0 * a)).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub tol: f64,
    pub max_len: f64,
    /// Stop once the projected point is this far from the chart origin.
    pub exit_radius: f64,
    /// `+1` integrates along the Lie-Cartan field, `-1` against it.
    pub time_sign: f64,
}

impl LiftOptions {
    pub fn new(max_step: f64, exit_radius: f64) -> Self {
        Self {
            initial_step: SEPARATRIX_OFFSET,
            max_step,
            min_step: 1e-12,
            tol: DEFAULT_STEP_TOL,
            max_len: f64::INFINITY,
            exit_radius,
            time_sign: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPath {
    /// `(x, y, z)` samples, each projected onto `F = 0`.
    pub points: Vec<[f64; 3]>,
    /// Largest `|F|` after projection.
    pub max_residual: f64,
    pub length: f64,
    pub stop: StopReason,
}

impl LiftedPath {
    pub fn projected(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p[0], p[1]]).collect()
    }
}

/// One Newton step in `z` towards `F(x, y, z) = 0`; returns the corrected
/// point and the remaining `|F|`.
fn project_lift<S: ScreenField + ?Sized>(field: &S, p: [f64; 3]) -> Result<([f64; 3], f64)> {
    let c = field.bde(p[0], p[1])?;
    let value = |z: f64| (c.a * z + c.b) * z + c.c;
    let fz = 2.0 * c.a * p[2] + c.b;
    let mut z = p[2];
    if fz != 0.0 {
        z -= value(z) / fz;
    }
    Ok(([p[0], p[1], z], value(z).abs()))
}

/// Integrates the unit Lie-Cartan field on the lifted surface from `seed`,
/// projecting back onto `F = 0` after every accepted step.
pub fn integrate_lie_cartan<S: ScreenField + ?Sized>(field: &S, seed: [f64; 3], opts: &LiftOptions) -> Result<LiftedPath> {
    let (_, seed_residual) = project_lift(field, seed)?;
    let seed_value = crate::lie_cartan::lift_function(field, seed[0], seed[1], seed[2])?;
    if seed_value.abs() > LIFT_SEED_TOL {
        return Err(Error::InvalidParameter(format!("lift seed is off the lifted surface: |F| = {:e}", seed_value.abs())));
    }
    let sign = opts.time_sign.signum();
    let mut f = |p: &[f64; 3]| -> Result<[f64; 3]> {
        let x = lie_cartan_field(field, p[0], p[1], p[2])?;
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if n == 0.0 {
            return Err(Error::UmbilicPoint { x: p[0], y: p[1] });
        }
        Ok(std::array::from_fn(|i| sign * x[i] / n))
    };
    let mut y = seed;
    let mut points = vec![seed];
    let mut max_residual = seed_residual.min(seed_value.abs());
    let mut length = 0.0;
    let mut h = opts.initial_step.min(opts.max_step);
    let stop = loop {
        if length >= opts.max_len {
            break StopReason::MaxLength;
        }
        if y[0].hypot(y[1]) >= opts.exit_radius {
            break StopReason::Bound;
        }
        let h_try = h.min(opts.max_len - length);
        let (next, err) = match bs32_step(&mut f, &y, h_try) {
            Ok(r) => r,
            Err(e) if is_terminal(&e) => {
                if h_try <= opts.min_step {
                    break StopReason::Domain;
                }
                h = 0.25 * h_try;
                continue;
            }
            Err(e) => return Err(e),
        };
        if err > opts.tol && h_try > opts.min_step {
            h = (h_try * step_factor(err, opts.tol)).max(opts.min_step);
            continue;
        }
        let (next, residual) = match project_lift(field, next) {
            Ok(r) => r,
            Err(e) if is_terminal(&e) => break StopReason::Domain,
            Err(e) => return Err(e),
        };
        if residual > LIFT_DRIFT_ABORT {
            return Err(Error::LiftDrift { residual, x: next[0], y: next[1], z: next[2] });
        }
        max_residual = max_residual.max(residual);
        length += h_try;
        y = next;
        points.push(y);
        h = (h_try * step_factor(err, opts.tol)).min(opts.max_step);
    };
    Ok(LiftedPath { points, max_residual, length, stop })
}

/// One branch of an umbilical separatrix: the ray leaving the umbilic with
/// limiting direction `branch * (1, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separatrix {
    pub source: FiberSingularity,
    /// `+1` or `-1`.
    pub branch: i8,
    /// Unit limiting direction at the umbilic.
    pub approach: [f64; 2],
    /// Angle between the integrated ray near the umbilic and `approach`.
    pub approach_error: f64,
    /// Foliation the ray belongs to past the lifted segment.
    pub family: Family,
    /// Starts at the umbilic.
    pub points: Vec<[f64; 2]>,
    /// Largest `|F|` on the lifted segment.
    pub lift_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixOptions {
    pub offset: f64,
    /// Radius where the lifted segment hands over to direct continuation.
    pub handoff_radius: f64,
    /// Outer radius of the continuation.
    pub bound: f64,
    pub max_step: f64,
    pub tol: f64,
    /// Radius at which the approach direction is measured.
    pub probe_radius: f64,
}

impl SeparatrixOptions {
    pub fn for_radius(radius: f64) -> Self {
        Self {
            offset: SEPARATRIX_OFFSET,
            handoff_radius: 0.05 * radius,
            bound: radius,
            max_step: 0.01 * radius,
            tol: DEFAULT_STEP_TOL,
            probe_radius: 10.0 * SEPARATRIX_OFFSET,
        }
    }
}

fn angle_between(u: [f64; 2], v: [f64; 2]) -> f64 {
    let cross = u[0] * v[1] - u[1] * v[0];
    cross.atan2(dot(u, v)).abs()
}

/// Both branches of the separatrix of every fiber saddle of a Darbouxian umbilic.
pub fn extract_separatrices<S: ScreenField + ?Sized>(
    verdict: &UmbilicVerdict,
    field: &S,
    opts: &SeparatrixOptions,
) -> Result<Vec<Separatrix>> {
    if !verdict.class.is_darbouxian() {
        return Err(Error::NotDarbouxian(format!("verdict is {}", verdict.class)));
    }
    let mut out = Vec::new();
    for saddle in verdict.saddles() {
        for branch in [1i8, -1] {
            out.push(separatrix_branch(field, saddle, branch, opts)?);
        }
    }
    Ok(out)
}

fn separatrix_branch<S: ScreenField + ?Sized>(
    field: &S,
    saddle: &FiberSingularity,
    branch: i8,
    opts: &SeparatrixOptions,
) -> Result<Separatrix> {
    let s = f64::from(branch);
    let z = saddle.z;
    let approach = unit([s, s * z]);
    let seed = [s * opts.offset, s * opts.offset * z, z];
    let mut lift_opts = LiftOptions::new(opts.max_step, opts.handoff_radius);
    lift_opts.initial_step = opts.offset;
    lift_opts.tol = opts.tol;
    // the branch leaves along the eigenvector of beta2
    lift_opts.time_sign = saddle.beta2.signum();
    lift_opts.max_len = 10.0 * opts.bound;
    let lifted = integrate_lie_cartan(field, seed, &lift_opts)?;

    let mut points = vec![[0.0, 0.0]];
    points.extend(lifted.projected());
    let approach_error = probe_direction(&points, opts.probe_radius).map_or(f64::NAN, |d| angle_between(d, approach));

    let last = *points.last().expect("lifted path is never empty");
    let heading = {
        let prev = points[points.len() - 2];
        unit([last[0] - prev[0], last[1] - prev[1]])
    };
    let pair = principal_directions_at(field, last[0], last[1])?;
    let family = if dot(pair.one, heading).abs() >= dot(pair.two, heading).abs() { Family::One } else { Family::Two };
    if lifted.stop == StopReason::Bound && norm(last) < opts.bound {
        let mut curve_opts = CurveOptions::new(opts.max_step, 10.0 * opts.bound);
        curve_opts.tol = opts.tol;
        curve_opts.bound = Some(opts.bound);
        curve_opts.umbilic_radius = Some(opts.handoff_radius);
        let far = integrate_curve(field, last, family, Some(heading), &curve_opts)?;
        points.extend(far.points.into_iter().skip(1));
    }
    Ok(Separatrix { source: *saddle, branch, approach, approach_error, family, points, lift_residual: lifted.max_residual })
}

/// Direction from the first point to where the polyline first reaches `radius` from it.
fn probe_direction(points: &[[f64; 2]], radius: f64) -> Option<[f64; 2]> {
    let o = points[0];
    let rel = |p: [f64; 2]| [p[0] - o[0], p[1] - o[1]];
    let w = points.windows(2).find(|w| norm(rel(w[1])) >= radius)?;
    let (p, q) = (rel(w[0]), rel(w[1]));
    let t = circle_exit(p, [q[0] - p[0], q[1] - p[1]], radius);
    Some(unit([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortraitOptions {
    pub radius: f64,
    pub seeds_per_family: usize,
    pub families: Vec<Family>,
    pub tol: f64,
    pub jet_step: f64,
    pub classify_tol: f64,
}

impl PortraitOptions {
    pub fn new(radius: f64, seeds_per_family: usize) -> Self {
        Self {
            radius,
            seeds_per_family,
            families: Family::BOTH.to_vec(),
            tol: DEFAULT_STEP_TOL,
            jet_step: DEFAULT_JET_STEP,
            classify_tol: DEFAULT_TOL,
        }
    }

    pub fn max_step(&self) -> f64 {
        0.01 * self.radius
    }
}

/// Principal configuration in the disk of radius `radius` about the umbilic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Portrait {
    pub verdict: UmbilicVerdict,
    pub radius: f64,
    pub families: Vec<Family>,
    /// Curves seeded on the bounding circle.
    pub curves: Vec<Polyline>,
    pub separatrices: Vec<Separatrix>,
    /// Unit `(1, z)` of every fiber node; curves reach the umbilic tangent to these.
    pub node_directions: Vec<[f64; 2]>,
}

impl Portrait {
    pub fn saddle_count(&self) -> usize {
        self.verdict.count(SingularityKind::Saddle)
    }

    pub fn node_count(&self) -> usize {
        self.node_directions.len()
    }

    /// Distinct saddle-derived approach directions among the separatrices.
    pub fn separatrix_directions(&self) -> Vec<[f64; 2]> {
        let mut zs: Vec<f64> = Vec::new();
        for s in &self.separatrices {
            if !zs.iter().any(|z| (z - s.source.z).abs() < 1e-12) {
                zs.push(s.source.z);
            }
        }
        zs.into_iter().map(|z| unit([1.0, z])).collect()
    }

    pub fn max_approach_error(&self) -> f64 {
        self.separatrices.iter().map(|s| s.approach_error).fold(0.0, f64::max)
    }

    /// Curves and separatrix branches as (family, polyline) pairs.
    pub fn strokes(&self) -> impl Iterator<Item = (Family, &[[f64; 2]])> {
        self.curves
            .iter()
            .map(|c| (c.family, c.points.as_slice()))
            .chain(self.separatrices.iter().map(|s| (s.family, s.points.as_slice())))
    }

    /// Largest orthogonality residual of the two families over all curve vertices.
    pub fn max_orthogonality_residual<S: ScreenField + ?Sized>(&self, field: &S) -> Result<f64> {
        let mut worst = 0.0f64;
        for (_, pts) in self.strokes() {
            for p in pts.iter().filter(|p| norm(**p) > 1e-9) {
                let s = field.screen(p[0], p[1])?;
                if let Ok(pair) = principal_directions(&crate::shape::bde_at(&s), &s) {
                    worst = worst.max(pair.orthogonality_residual(&s.first));
                }
            }
        }
        Ok(worst)
    }

    /// Largest `|A dy^2 + B dx dy + C dx^2| / max(|A|, |B|, |C|)` over the
    /// unit chords of the family curves: how far the drawn tangents are from
    /// the lifted surface.
    pub fn max_lift_residual<S: ScreenField + ?Sized>(&self, field: &S) -> Result<f64> {
        let mut worst = 0.0f64;
        for c in &self.curves {
            for p in &c.points {
                let s = field.screen(p[0], p[1])?;
                let pair = match principal_directions(&crate::shape::bde_at(&s), &s) {
                    Ok(pair) => pair,
                    Err(_) => continue,
                };
                let [dx, dy] = pair.get(c.family);
                let bde = crate::shape::bde_at(&s);
                worst = worst.max((bde.a * dy * dy + bde.b * dx * dy + bde.c * dx * dx).abs() / bde.max_abs());
            }
        }
        Ok(worst)
    }

    /// Proper crossings between distinct same-family strokes, ignoring
    /// segments that reach into the disk of radius `exclusion` about the umbilic.
    pub fn same_family_crossings(&self, exclusion: f64) -> usize {
        let strokes: Vec<_> = self.strokes().collect();
        count_crossings(&strokes, exclusion, self.radius / 50.0)
    }
}

fn orient(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
}

fn segments_cross(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> bool {
    let d1 = orient(a[0], a[1], b[0]);
    let d2 = orient(a[0], a[1], b[1]);
    let d3 = orient(b[0], b[1], a[0]);
    let d4 = orient(b[0], b[1], a[1]);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Grid-bucketed sweep for proper crossings between different strokes of the same family.
pub fn count_crossings(strokes: &[(Family, &[[f64; 2]])], exclusion: f64, cell: f64) -> usize {
    let mut segments = Vec::new();
    for (id, (family, pts)) in strokes.iter().enumerate() {
        for w in pts.windows(2) {
            if norm(w[0]) >= exclusion && norm(w[1]) >= exclusion {
                segments.push((id, *family, [w[0], w[1]]));
            }
        }
    }
    let key = |v: f64| (v / cell).floor() as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (_, _, s)) in segments.iter().enumerate() {
        let (x0, x1) = (key(s[0][0].min(s[1][0])), key(s[0][0].max(s[1][0])));
        let (y0, y1) = (key(s[0][1].min(s[1][1])), key(s[0][1].max(s[1][1])));
        for gx in x0..=x1 {
            for gy in y0..=y1 {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut found = HashSet::new();
    for bucket in grid.values() {
        for (n, &i) in bucket.iter().enumerate() {
            for &j in &bucket[n + 1..] {
                let (si, sj) = (&segments[i], &segments[j]);
                if si.0 != sj.0 && si.1 == sj.1 && segments_cross(si.2, sj.2) {
                    found.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    found.len()
}

/// Classifies the umbilic at the chart origin and assembles its portrait.
pub fn build_portrait(surface: &Surface, opts: &PortraitOptions) -> Result<Portrait> {
    if !(opts.radius > 0.0) || opts.seeds_per_family == 0 {
        return Err(Error::InvalidParameter("portrait needs a positive radius and at least one seed".into()));
    }
    let jet = bde_one_jet_numeric(surface, opts.jet_step)?;
    let verdict = classify_umbilic(&jet, opts.classify_tol);
    if !verdict.class.is_darbouxian() {
        return Err(Error::NotDarbouxian(format!("verdict is {}", verdict.class)));
    }
    let mut sep_opts = SeparatrixOptions::for_radius(opts.radius);
    sep_opts.tol = opts.tol;
    let separatrices = extract_separatrices(&verdict, surface, &sep_opts)?
        .into_iter()
        .filter(|s| opts.families.contains(&s.family))
        .collect();
    let mut curve_opts = CurveOptions::new(opts.max_step(), 10.0 * opts.radius);
    curve_opts.tol = opts.tol;
    curve_opts.bound = Some(opts.radius);
    let mut curves: Vec<Polyline> = Vec::new();
    // a curve that exits through a later seed is that seed's curve reversed
    let duplicate = 1e-3 * opts.radius;
    for &family in &opts.families {
        for i in 0..opts.seeds_per_family {
            let t = std::f64::consts::TAU * (i as f64 + 0.5) / opts.seeds_per_family as f64;
            let seed = [opts.radius * t.cos(), opts.radius * t.sin()];
            let seen = curves.iter().filter(|c| c.family == family && c.stop == StopReason::Bound).any(|c| {
                let end = c.points[c.points.len() - 1];
                norm([end[0] - seed[0], end[1] - seed[1]]) < duplicate
            });
            if seen {
                continue;
            }
            match integrate_curve(surface, seed, family, Some([-t.cos(), -t.sin()]), &curve_opts) {
                Ok(c) if c.points.len() > 1 => curves.push(c),
                Ok(_) => {}
                Err(e) if is_terminal(&e) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let node_directions = verdict
        .singularities
        .iter()
        .filter(|s| s.kind == SingularityKind::Node)
        .map(|s| unit([1.0, s.z]))
        .collect();
    Ok(Portrait { verdict, radius: opts.radius, families: opts.families.clone(), curves, separatrices, node_directions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_cartan::{lift_function, BdeOneJet};
    use crate::shape::ConstantField;
    use crate::surfaces::HostSurface;
    use rand::{Rng, SeedableRng};

    fn constant(a: f64, b: f64, c: f64) -> ScreenCoefficients {
        // identity metric: A = f, B = e - g, C = -f
        assert_eq!(a, -c);
        ScreenCoefficients { e: 0.5 * b, f: a, g: -0.5 * b, first: FirstFundamentalForm::IDENTITY }
    }

    fn parallel(u: [f64; 2], v: [f64; 2]) -> bool {
        (u[0] * v[1] - u[1] * v[0]).abs() < 1e-12
    }

    #[test]
    fn direction_examples() {
        let s = constant(0.0, 1.0, 0.0);
        let pair = principal_directions(&crate::shape::bde_at(&s), &s).unwrap();
        assert!(parallel(pair.two, [1.0, 0.0]) && parallel(pair.one, [0.0, 1.0]));

        let s = constant(1.0, 0.0, -1.0);
        let pair = principal_directions(&crate::shape::bde_at(&s), &s).unwrap();
        let slopes = [pair.one[1] / pair.one[0], pair.two[1] / pair.two[0]];
        assert!((slopes[0] * slopes[1] + 1.0).abs() < 1e-12 && (slopes[0].abs() - 1.0).abs() < 1e-12);

        let s = ScreenCoefficients { e: 1.0, f: 0.0, g: 1.0, first: FirstFundamentalForm::IDENTITY };
        assert!(matches!(principal_directions(&crate::shape::bde_at(&s), &s), Err(Error::UmbilicPoint { .. })));
    }

    #[test]
    fn directions_are_orthogonal_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for host in HostSurface::ROTATION_HOSTS {
            for _ in 0..300 {
                let mut p = || rng.gen_range(-3.0..3.0);
                let s = Surface::rotation(host, p(), p(), p(), p()).unwrap();
                let (x, y) = (0.3 * rng.gen_range(-1.0..1.0), 0.3 * rng.gen_range(-1.0..1.0));
                let pair = principal_directions_at(&s, x, y).unwrap();
                let first = s.screen(x, y).unwrap().first;
                assert!(pair.orthogonality_residual(&first) < 1e-8);
            }
        }
    }

    #[test]
    fn constant_field_curve_stays_horizontal() {
        let field = ConstantField(constant(0.0, 1.0, 0.0));
        let c = integrate_curve(&field, [0.1, 0.2], Family::Two, Some([1.0, 0.0]), &CurveOptions::new(0.01, 1.0)).unwrap();
        assert_eq!(c.stop, StopReason::MaxLength);
        assert!(c.points.iter().all(|p| (p[1] - 0.2).abs() < 1e-9));
        assert!((c.points.last().unwrap()[0] - 1.1).abs() < 1e-9);
    }

    #[test]
    fn curves_are_reversible() {
        let s = Surface::rotation(HostSurface::LightCone3, 0.3, 3.0, 2.0, 1.0).unwrap();
        for family in Family::BOTH {
            let mut opts = CurveOptions::new(0.005, 0.15);
            opts.umbilic_radius = Some(0.0);
            let fwd = integrate_curve(&s, [0.2, 0.1], family, None, &opts).unwrap();
            assert_eq!(fwd.stop, StopReason::MaxLength);
            let end = *fwd.points.last().unwrap();
            let prev = fwd.points[fwd.points.len() - 2];
            let back = integrate_curve(&s, end, family, Some([prev[0] - end[0], prev[1] - end[1]]), &opts).unwrap();
            let home = back.points.last().unwrap();
            assert!((home[0] - 0.2).hypot(home[1] - 0.1) < 1e-7, "{family}: {home:?}");
        }
    }

    #[test]
    fn families_stay_orthogonal_along_a_curve() {
        let s = Surface::rotation(HostSurface::NullCylinder, 0.1, 1.0, 2.0, 5.0).unwrap();
        let c = integrate_curve(&s, [0.15, -0.1], Family::One, None, &CurveOptions::new(0.005, 0.2)).unwrap();
        for p in &c.points {
            let pair = principal_directions_at(&s, p[0], p[1]).unwrap();
            assert!(pair.orthogonality_residual(&s.screen(p[0], p[1]).unwrap().first) < 1e-8);
        }
    }

    #[test]
    fn curve_stops_near_the_umbilic() {
        let s = Surface::rotation(HostSurface::NullHyperplane, 0.0, 3.0, 1.0, 0.0).unwrap();
        // along the D1 separatrix towards the umbilic
        let pair = principal_directions_at(&s, 0.1, 0.0).unwrap();
        let family = if pair.one[0].abs() > pair.two[0].abs() { Family::One } else { Family::Two };
        let c = integrate_curve(&s, [0.1, 0.0], family, Some([-1.0, 0.0]), &CurveOptions::new(0.001, 1.0)).unwrap();
        assert_eq!(c.stop, StopReason::Umbilic);
        let end = c.points.last().unwrap();
        assert!(end[0].hypot(end[1]) < 0.01 && end[1].abs() < 1e-6);
    }

    #[test]
    fn lift_on_the_fiber_moves_only_in_z() {
        let field = BdeOneJet::rotation_closed_form(3.0, 2.0, 1.0);
        let x = lie_cartan_field(&field, 0.0, 0.0, 0.4).unwrap();
        assert!(x[0].abs() < 1e-14 && x[1].abs() < 1e-14 && x[2] != 0.0);
        // the cubic is negative on (0, 1), so X_z = -cubic pushes z up towards the root at 1
        let mut opts = LiftOptions::new(0.01, 1.0);
        opts.max_len = 0.55;
        opts.initial_step = 0.01;
        let path = integrate_lie_cartan(&field, [0.0, 0.0, 0.4], &opts).unwrap();
        assert!(path.points.iter().all(|p| p[0] == 0.0 && p[1] == 0.0));
        let zend = path.points.last().unwrap()[2];
        assert!((zend - 0.95).abs() < 1e-9, "{zend}");
    }

    #[test]
    fn saddle_branch_leaves_along_its_eigenvector() {
        let s = Surface::rotation(HostSurface::LightCone3, 0.2, 1.0, 2.0, 5.0).unwrap();
        let v = classify_umbilic(&bde_one_jet_numeric(&s, DEFAULT_JET_STEP).unwrap(), DEFAULT_TOL);
        for saddle in v.saddles() {
            let seed = [SEPARATRIX_OFFSET, SEPARATRIX_OFFSET * saddle.z, saddle.z];
            assert!(lift_function(&s, seed[0], seed[1], seed[2]).unwrap().abs() < LIFT_SEED_TOL);
            let mut opts = LiftOptions::new(1e-3, 0.01);
            opts.time_sign = saddle.beta2.signum();
            let path = integrate_lie_cartan(&s, seed, &opts).unwrap();
            assert!(path.max_residual < 1e-6);
            let pts: Vec<_> = std::iter::once([0.0, 0.0]).chain(path.projected()).collect();
            let d = probe_direction(&pts, 1e-3).unwrap();
            assert!(angle_between(d, unit([1.0, saddle.z])) < 1e-3);
        }
    }

    #[test]
    fn lift_seed_must_be_on_the_surface() {
        let field = BdeOneJet::rotation_closed_form(3.0, 2.0, 1.0);
        let r = integrate_lie_cartan(&field, [0.1, 0.1, 0.5], &LiftOptions::new(0.01, 1.0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn separatrix_directions_for_witnesses() {
        let cases = [((3.0, 1.0, 0.0), vec![0.0]), ((3.0, 2.0, 1.0), vec![-0.5, 1.0]), ((1.0, 2.0, 5.0), vec![-0.5, 0.0, 3.0])];
        for ((a, b, c), zs) in cases {
            let s = Surface::rotation(HostSurface::NullHyperplane, 0.0, a, b, c).unwrap();
            let v = classify_umbilic(&bde_one_jet_numeric(&s, DEFAULT_JET_STEP).unwrap(), DEFAULT_TOL);
            let seps = extract_separatrices(&v, &s, &SeparatrixOptions::for_radius(0.2)).unwrap();
            assert_eq!(seps.len(), 2 * zs.len());
            for (sep, z) in seps.chunks(2).zip(&zs) {
                assert!((sep[0].source.z - z).abs() < 1e-8);
                assert!(sep.iter().all(|s| s.approach_error < 1e-3), "{:?}", sep.iter().map(|s| s.approach_error).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn non_darbouxian_verdict_rejected() {
        let v = classify_umbilic(&BdeOneJet::rotation_closed_form(2.0, 2.0, 1.0), DEFAULT_TOL);
        let field = BdeOneJet::rotation_closed_form(2.0, 2.0, 1.0);
        assert!(matches!(extract_separatrices(&v, &field, &SeparatrixOptions::for_radius(0.2)), Err(Error::NotDarbouxian(_))));
    }

    #[test]
    fn witness_portraits() {
        let cases = [((3.0, 1.0, 0.0), 1, 0), ((3.0, 2.0, 1.0), 2, 1), ((1.0, 2.0, 5.0), 3, 0)];
        for ((a, b, c), saddles, nodes) in cases {
            let s = Surface::rotation(HostSurface::LightCone3, 0.0, a, b, c).unwrap();
            let p = build_portrait(&s, &PortraitOptions::new(0.2, 12)).unwrap();
            assert_eq!((p.saddle_count(), p.node_count()), (saddles, nodes));
            assert_eq!(p.separatrix_directions().len(), saddles);
            assert!(p.max_approach_error() < 1e-3);
            assert_eq!(p.same_family_crossings(0.02), 0);
            assert!(p.max_orthogonality_residual(&s).unwrap() < 1e-8);
            assert!(p.max_lift_residual(&s).unwrap() < 1e-6);
        }
    }

    #[test]
    fn single_family_portrait() {
        let s = Surface::rotation(HostSurface::NullHyperplane, 0.0, 3.0, 2.0, 1.0).unwrap();
        let mut opts = PortraitOptions::new(0.2, 8);
        opts.families = vec![Family::One];
        let p = build_portrait(&s, &opts).unwrap();
        assert!(p.strokes().all(|(f, _)| f == Family::One));
        assert!(!p.curves.is_empty());
    }

    #[test]
    fn portrait_rejects_degenerate_umbilic() {
        let s = Surface::rotation(HostSurface::NullCylinder, 0.0, 2.0, 2.0, 1.0).unwrap();
        assert!(matches!(build_portrait(&s, &PortraitOptions::new(0.2, 8)), Err(Error::NotDarbouxian(_))));
    }

    #[test]
    fn crossing_sweep() {
        let a: &[[f64; 2]] = &[[0.0, 0.0], [1.0, 1.0]];
        let b: &[[f64; 2]] = &[[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(count_crossings(&[(Family::One, a), (Family::One, b)], 0.0, 0.1), 1);
        assert_eq!(count_crossings(&[(Family::One, a), (Family::Two, b)], 0.0, 0.1), 0);
        assert_eq!(count_crossings(&[(Family::One, a), (Family::One, b)], 2.0, 0.1), 0);
    }
}
