//! The null transversal field `eta`: `<eta, xi> = 1`, `<eta, eta> = 0`, `eta ⟂ TS`.

use crate::error::{Error, Result};
use crate::minkowski::SpacetimeVector;
use crate::surfaces::{Surface, SurfaceJet};
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

/// Smallest admissible stencil spacing for [`eta_jet_check`].
pub const ETA_STEP_MIN: f64 = 1e-7;
/// Largest admissible stencil spacing for [`eta_jet_check`].
pub const ETA_STEP_MAX: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullFrame {
    pub eta: SpacetimeVector,
    pub xi: SpacetimeVector,
    pub phi_x: SpacetimeVector,
    pub phi_y: SpacetimeVector,
}

impl NullFrame {
    /// Largest deviation among the four defining pairings.
    pub fn contract_residual(&self) -> f64 {
        [
            self.eta.dot(&self.xi) - 1.0,
            self.eta.norm_sq(),
            self.eta.dot(&self.phi_x),
            self.eta.dot(&self.phi_y),
        ]
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Builds `eta` at one point with the best-conditioned completion vector.
pub fn solve_eta(j: &SurfaceJet) -> Result<NullFrame> {
    let (idx, _) = (0..4)
        .map(|i| (i, system(j, i).determinant().abs()))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    solve_eta_with_completion(j, idx)
}

fn system(j: &SurfaceJet, completion: usize) -> Matrix4<f64> {
    let rows = [j.xi.lowered(), j.phi_x.lowered(), j.phi_y.lowered(), SpacetimeVector::basis(completion).lowered()];
    Matrix4::from_fn(|r, c| rows[r][c])
}

/// Builds `eta` with the completion condition `<w, e_completion> = 0`.
///
/// Any `w` with `<w, xi> = 1` and `w ⟂ Phi_x, Phi_y` differs from `eta` by a
/// multiple of `xi`, and `w - (<w,w>/2) xi` removes it, so the result does not
/// depend on `completion` as long as the system is regular.
pub fn solve_eta_with_completion(j: &SurfaceJet, completion: usize) -> Result<NullFrame> {
    let m = system(j, completion);
    let lu = m.full_piv_lu();
    let scale = m.abs().max().max(1.0);
    // the LU pivots are the diagonal of U; the smallest one measures the rank
    let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |p, d| p.min(d.abs()));
    if !(pivot > 1e-12 * scale) {
        return Err(Error::RankDeficient { pivot });
    }
    let w = lu.solve(&Vector4::new(1.0, 0.0, 0.0, 0.0)).ok_or(Error::RankDeficient { pivot })?;
    let w = SpacetimeVector([w[0], w[1], w[2], w[3]]);
    let eta = w - (0.5 * w.norm_sq()) * j.xi;
    Ok(NullFrame { eta, xi: j.xi, phi_x: j.phi_x, phi_y: j.phi_y })
}

/// Numerical 1-jet of `eta` at the umbilic: value and central differences on
/// the 5-point stencil `(0,0), (±h,0), (0,±h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaOneJet {
    pub value: SpacetimeVector,
    pub d_x: SpacetimeVector,
    pub d_y: SpacetimeVector,
}

pub fn eta_one_jet(surface: &Surface, h: f64) -> Result<EtaOneJet> {
    if !(ETA_STEP_MIN..=ETA_STEP_MAX).contains(&h) {
        return Err(Error::InvalidStep { h, min: ETA_STEP_MIN, max: ETA_STEP_MAX });
    }
    let eta = |x: f64, y: f64| -> Result<SpacetimeVector> { Ok(solve_eta(&surface.immersion_point(x, y)?)?.eta) };
    let inv = 1.0 / (2.0 * h);
    Ok(EtaOneJet {
        value: eta(0.0, 0.0)?,
        d_x: inv * (eta(h, 0.0)? - eta(-h, 0.0)?),
        d_y: inv * (eta(0.0, h)? - eta(0.0, -h)?),
    })
}

/// Max absolute deviation of the numerical 1-jet of `eta` from
/// `(-1/2, -k x, -k y, 1/2)`.
pub fn eta_jet_check(surface: &Surface, h: f64) -> Result<f64> {
    let jet = eta_one_jet(surface, h)?;
    let k = surface.k();
    let expected = [
        (jet.value, SpacetimeVector::new(-0.5, 0.0, 0.0, 0.5)),
        (jet.d_x, SpacetimeVector::new(0.0, -k, 0.0, 0.0)),
        (jet.d_y, SpacetimeVector::new(0.0, 0.0, -k, 0.0)),
    ];
    Ok(expected.iter().map(|(got, want)| (*got - *want).max_abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{CubicForm, FJet, HostSurface};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const HOSTS: [HostSurface; 4] = [
        HostSurface::NullHyperplane,
        HostSurface::LightCone3,
        HostSurface::NullCylinder,
        HostSurface::GenericGraph(FJet { f0: 0.0, a: 0.0, d: 0.0, b: 0.0, c: 0.0 }),
    ];

    fn random_surface(rng: &mut ChaCha8Rng, host: HostSurface) -> Surface {
        let mut p = || rng.gen_range(-2.0..2.0);
        match host {
            HostSurface::GenericGraph(_) => {
                let f = FJet { f0: p(), a: p(), d: p(), b: p(), c: p() };
                Surface::generic(p(), p(), p(), f, CubicForm::new(p(), p(), p(), p()))
            }
            h => Surface::rotation(h, p(), p(), p(), p()).unwrap(),
        }
    }

    #[test]
    fn eta_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for host in HOSTS {
            let s = random_surface(&mut rng, host);
            let frame = solve_eta(&s.immersion_point(0.0, 0.0).unwrap()).unwrap();
            assert!((frame.eta - SpacetimeVector::new(-0.5, 0.0, 0.0, 0.5)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn frame_contract_off_origin() {
        let s = Surface::rotation(HostSurface::NullHyperplane, 1.0, 0.0, 0.0, 0.0).unwrap();
        let frame = solve_eta(&s.immersion_point(0.4, -0.3).unwrap()).unwrap();
        assert!(frame.contract_residual() < 1e-11);
    }

    #[test]
    fn frame_contract_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for host in HOSTS {
            for _ in 0..1000 {
                let s = random_surface(&mut rng, host);
                let r = 0.3 * rng.gen::<f64>().sqrt();
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                let frame = solve_eta(&s.immersion_point(r * t.cos(), r * t.sin()).unwrap()).unwrap();
                assert!(frame.contract_residual() < 1e-11, "{host}: {}", frame.contract_residual());
            }
        }
    }

    #[test]
    fn completion_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for host in HOSTS {
            for _ in 0..100 {
                let s = random_surface(&mut rng, host);
                let j = s.immersion_point(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)).unwrap();
                let etas: Vec<_> = (0..4).filter_map(|i| solve_eta_with_completion(&j, i).ok()).collect();
                assert!(etas.len() >= 2);
                for e in &etas[1..] {
                    assert!((e.eta - etas[0].eta).max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rank_deficiency_reported() {
        let mut j = Surface::rotation(HostSurface::NullHyperplane, 0.0, 0.0, 0.0, 0.0)
            .unwrap()
            .immersion_point(0.0, 0.0)
            .unwrap();
        j.phi_y = j.phi_x;
        assert!(matches!(solve_eta(&j), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn lemma_one_jet_on_the_cone() {
        let s = Surface::rotation(HostSurface::LightCone3, 0.5, 0.3, -0.2, 0.7).unwrap();
        let jet = eta_one_jet(&s, 1e-4).unwrap();
        assert!((jet.d_x - SpacetimeVector::new(0.0, -0.5, 0.0, 0.0)).max_abs() < 1e-6);
        assert!((jet.d_y - SpacetimeVector::new(0.0, 0.0, -0.5, 0.0)).max_abs() < 1e-6);
    }

    #[test]
    fn eta_jet_check_examples() {
        let cases = [
            (HostSurface::NullHyperplane, 2.0, 1.0, 1.0, 1.0),
            (HostSurface::LightCone3, 0.0, 3.0, 1.0, 0.0),
            (HostSurface::NullCylinder, 1.0, 1.0, 2.0, 5.0),
        ];
        for (host, k, a, b, c) in cases {
            let s = Surface::rotation(host, k, a, b, c).unwrap();
            let dev = eta_jet_check(&s, 1e-4).unwrap();
            assert!(dev < 1e-6, "{host}: {dev}");
        }
    }

    #[test]
    fn eta_jet_check_rejects_bad_steps() {
        let s = Surface::rotation(HostSurface::LightCone3, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(eta_jet_check(&s, 0.1), Err(Error::InvalidStep { .. })));
        assert!(matches!(eta_jet_check(&s, 1e-9), Err(Error::InvalidStep { .. })));
    }
}
