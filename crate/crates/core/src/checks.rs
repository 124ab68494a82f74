//! Runnable verification suites: each check draws its own inputs from a
//! seeded generator, runs the pipeline, and reports pass/fail with the
//! measured worst case.

use crate::frame::{eta_jet_check, solve_eta};
use crate::integrate::{build_portrait, PortraitOptions};
use crate::lie_cartan::{
    bde_one_jet_numeric, classify_umbilic, cubic_from_jet, numeric_linearization_check, real_roots, BdeOneJet,
    DEFAULT_JET_STEP, DEFAULT_TOL,
};
use crate::shape::{xi_umbilicity_deviation, ScreenField};
use crate::surfaces::{CubicForm, FJet, HostSurface, Surface};
use crate::theorem::{CrossValidation, JetFault, Report};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Sample sizes of the suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sizes {
    pub frame_points: usize,
    pub lemma_draws: usize,
    pub graph_jets: usize,
    pub root_samples: usize,
    pub cross_validation: usize,
    pub xi_surfaces: usize,
    pub xi_samples: usize,
    pub identity_points: usize,
    pub equivalence_draws: usize,
}

impl Sizes {
    pub const FULL: Sizes = Sizes {
        frame_points: 1000,
        lemma_draws: 50,
        graph_jets: 100,
        root_samples: 500,
        cross_validation: 10_000,
        xi_surfaces: 10,
        xi_samples: 200,
        identity_points: 1000,
        equivalence_draws: 100,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// Wall-clock budget for the suite.
    pub budget: Duration,
}

impl CheckOutcome {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    /// `[PASS] 1 frame contract: ... (0.41 s)`.
    pub fn line(&self) -> String {
        let ok = self.passed && self.within_budget();
        format!(
            "[{}] {} {}: {} ({:.2} s of {} s)",
            if ok { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn timed(id: u8, name: &str, budget_s: u64, f: impl FnOnce() -> (bool, String)) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = f();
    CheckOutcome { id, name: name.to_string(), passed, detail, elapsed: start.elapsed(), budget: Duration::from_secs(budget_s) }
}

fn graph_host() -> HostSurface {
    HostSurface::GenericGraph(FJet::default())
}

const ALL_HOSTS: [HostSurface; 4] =
    [HostSurface::NullHyperplane, HostSurface::LightCone3, HostSurface::NullCylinder, HostSurface::GenericGraph(FJet {
        f0: 0.0,
        a: 0.0,
        d: 0.0,
        b: 0.0,
        c: 0.0,
    })];

/// A surface with parameters uniform in `[-2, 2]`.
pub fn random_surface(rng: &mut ChaCha8Rng, host: HostSurface) -> Surface {
    let mut p = || rng.gen_range(-2.0..=2.0);
    match host {
        HostSurface::GenericGraph(_) => {
            let f = FJet { f0: p(), a: p(), d: p(), b: p(), c: p() };
            Surface::generic(p(), p(), p(), f, CubicForm::new(p(), p(), p(), p()))
        }
        h => Surface::rotation(h, p(), p(), p(), p()).expect("rotation hosts accept any parameters"),
    }
}

fn random_disk_point(rng: &mut ChaCha8Rng, radius: f64) -> (f64, f64) {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    (r * t.cos(), r * t.sin())
}

fn worst<T>(items: impl IntoIterator<Item = Result<T>>, f: impl Fn(T) -> f64) -> std::result::Result<f64, String> {
    let mut w = 0.0f64;
    for item in items {
        w = w.max(f(item.map_err(|e| e.to_string())?));
    }
    Ok(w)
}

/// `eta` is null, normalized against `xi` and orthogonal to the tangent plane.
pub fn frame_contract(points_per_host: usize, seed: u64) -> CheckOutcome {
    timed(1, "frame contract", 5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lines = Vec::new();
        let mut ok = true;
        for host in ALL_HOSTS {
            let residuals = (0..points_per_host).map(|_| {
                let s = random_surface(&mut rng, host);
                let (x, y) = random_disk_point(&mut rng, 0.3);
                s.immersion_point(x, y).and_then(|j| solve_eta(&j))
            });
            match worst(residuals.collect::<Vec<_>>(), |f| f.contract_residual()) {
                Ok(w) => {
                    ok &= w < 1e-11;
                    lines.push(format!("{}={w:.1e}", host.name()));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{}: {e}", host.name()));
                }
            }
        }
        (ok, format!("max residual {} (tol 1e-11)", lines.join(" ")))
    })
}

/// Finite-difference 1-jet of `eta` at the umbilic is `(-1/2, -k x, -k y, 1/2)`.
pub fn eta_one_jet(draws_per_host: usize, seed: u64) -> CheckOutcome {
    timed(2, "eta 1-jet", 10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lines = Vec::new();
        let mut ok = true;
        for host in ALL_HOSTS {
            let devs: Vec<_> = (0..draws_per_host).map(|_| eta_jet_check(&random_surface(&mut rng, host), 1e-4)).collect();
            match worst(devs, |d| d) {
                Ok(w) => {
                    ok &= w < 1e-6;
                    lines.push(format!("{}={w:.1e}", host.name()));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{}: {e}", host.name()));
                }
            }
        }
        (ok, format!("max deviation {} (tol 1e-6)", lines.join(" ")))
    })
}

/// Numeric 1-jet of `A, B` against the closed forms: `(0, b, a - b, -c)` on
/// rotation hosts, and the published dependence on the 3-jets of `f` and `g`
/// on graph hosts.
pub fn bde_one_jet(graph_sets: usize, seed: u64) -> CheckOutcome {
    timed(3, "BDE 1-jet closed forms", 30, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rotation_worst = 0.0f64;
        let mut failures = Vec::new();
        for host in HostSurface::ROTATION_HOSTS {
            for _ in 0..graph_sets {
                let s = random_surface(&mut rng, host);
                let (a, b, c) = s.rotation_params().expect("rotation host");
                match bde_one_jet_numeric(&s, DEFAULT_JET_STEP) {
                    Ok(j) => rotation_worst = rotation_worst.max(j.max_deviation(&BdeOneJet::rotation_closed_form(a, b, c))),
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
        let mut graph_worst = 0.0f64;
        let mut ratio_spread = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..graph_sets {
            let s = random_surface(&mut rng, graph_host());
            let (HostSurface::GenericGraph(f), g) = (s.host(), s.g().cubic) else { unreachable!() };
            let closed = BdeOneJet::graph_closed_form(&f, &g);
            match bde_one_jet_numeric(&s, DEFAULT_JET_STEP) {
                Ok(j) => {
                    graph_worst = graph_worst.max(j.max_deviation(&closed) / closed.max_abs().max(1e-300));
                    // best single factor relating the two
                    let lambda = dot4(&j, &closed) / dot4(&closed, &closed);
                    ratio_spread = (ratio_spread.0.min(lambda), ratio_spread.1.max(lambda));
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
        let rotation_ok = rotation_worst < 1e-6;
        let graph_ok = graph_worst < 1e-5;
        let detail = format!(
            "rotation hosts max abs dev {rotation_worst:.1e} (tol 1e-6) {}; graph host max rel dev {graph_worst:.1e} (tol 1e-5) {}, numeric/closed-form factor in [{:.6}, {:.6}]{}",
            if rotation_ok { "ok" } else { "FAIL" },
            if graph_ok { "ok" } else { "FAIL" },
            ratio_spread.0,
            ratio_spread.1,
            if failures.is_empty() { String::new() } else { format!("; errors: {}", failures.join(" | ")) }
        );
        (rotation_ok && graph_ok && failures.is_empty(), detail)
    })
}

fn dot4(u: &BdeOneJet, v: &BdeOneJet) -> f64 {
    u.a1 * v.a1 + u.a2 * v.a2 + u.b1 * v.b1 + u.b2 * v.b2
}

/// Fiber roots from the full pipeline against `0, c/2b -+ sqrt(Delta)`, and
/// the finite-difference spectrum of the Lie-Cartan field at each root
/// against `beta2`, `beta3`.
pub fn roots_and_eigenvalues(samples: usize, seed: u64) -> CheckOutcome {
    timed(4, "fiber roots and eigenvalues", 20, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut root_worst, mut eig_worst) = (0.0f64, 0.0f64);
        let mut failures = Vec::new();
        let mut done = 0;
        while done < samples {
            let (a, b, c): (f64, f64, f64) = (rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0));
            let s = a.abs().max(b.abs()).max(c.abs());
            let r = a / b;
            let delta = (c / (2.0 * b)).powi(2) - r + 2.0;
            // keep the three roots (0 and z+-) apart and b(b - a) away from zero
            if b.abs() < 0.05 * s || (r - 1.0).abs() < 0.05 || delta.abs() < 1e-3 || (r - 2.0).abs() < 1e-3 {
                continue;
            }
            let host = HostSurface::ROTATION_HOSTS[done % 3];
            let k = rng.gen_range(-1.0..=1.0);
            done += 1;
            let mut expected = vec![0.0];
            if delta > 0.0 {
                let m = c / (2.0 * b);
                expected.extend([m - delta.sqrt(), m + delta.sqrt()]);
            }
            expected.sort_by(f64::total_cmp);
            let surface = Surface::rotation(host, k, a, b, c).expect("rotation host");
            let jet = match bde_one_jet_numeric(&surface, DEFAULT_JET_STEP) {
                Ok(j) => j,
                Err(e) => {
                    failures.push(format!("({a}, {b}, {c}): {e}"));
                    continue;
                }
            };
            let roots = match real_roots(&cubic_from_jet(&jet), DEFAULT_TOL) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("({a}, {b}, {c}): {e}"));
                    continue;
                }
            };
            if roots.len() != expected.len() {
                failures.push(format!("({a}, {b}, {c}): {} roots, expected {}", roots.len(), expected.len()));
                continue;
            }
            let exact = BdeOneJet::rotation_closed_form(a, b, c);
            for (root, z) in roots.iter().zip(&expected) {
                root_worst = root_worst.max((root.z - z).abs());
                let beta2 = (a - b) - c * z + 2.0 * b * z * z;
                let beta3 = -cubic_from_jet(&exact).derivative(*z);
                match numeric_linearization_check(&surface, root.z, (beta2, beta3), 1e-4) {
                    Ok(d) => eig_worst = eig_worst.max(d),
                    Err(e) => failures.push(format!("({a}, {b}, {c}) z={z}: {e}")),
                }
            }
        }
        let ok = root_worst < 1e-8 && eig_worst < 1e-4 && failures.is_empty();
        let mut detail = format!("max root error {root_worst:.1e} (tol 1e-8), max relative eigenvalue error {eig_worst:.1e} (tol 1e-4)");
        if !failures.is_empty() {
            detail += &format!("; {} failures, first: {}", failures.len(), failures[0]);
        }
        (ok, detail)
    })
}

/// Closed-form classification against the numerical pipeline on every
/// rotation host; any disagreement on a clause-covered sample fails.
pub fn classification_agreement(samples: usize, seed: u64, margin: f64, fault: JetFault) -> (CheckOutcome, Vec<(HostSurface, Report)>) {
    let mut reports = Vec::new();
    let outcome = timed(5, "closed-form classification", 120, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for host in HostSurface::ROTATION_HOSTS {
            let mut cv = CrossValidation::new(host);
            cv.samples = samples;
            cv.seed = seed;
            cv.margin = margin;
            cv.fault = fault;
            let report = cv.run();
            let s = report.summary();
            ok &= report.all_agree();
            parts.push(format!("{} {}/{} agree", host.name(), s.agreements, s.claimed));
            reports.push((host, report));
        }
        let mut detail = parts.join(", ");
        if let Some((_, rep)) = reports.iter().find(|(_, r)| !r.all_agree()) {
            let first = rep.disagreements().next().expect("has disagreements");
            detail += &format!(
                "; first disagreement (a, b, c) = ({:.4}, {:.4}, {:.4}) closed form {} numeric {}",
                first.a, first.b, first.c, first.closed_form, first.numeric
            );
        }
        (ok, detail)
    });
    (outcome, reports)
}

/// The `xi`-screen operator of a light-cone surface vanishes identically.
pub fn xi_umbilicity(surfaces: usize, samples: usize, seed: u64) -> CheckOutcome {
    timed(6, "xi total umbilicity", 5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let devs: Vec<_> = (0..surfaces)
            .map(|_| xi_umbilicity_deviation(&random_surface(&mut rng, HostSurface::LightCone3), samples))
            .collect();
        match worst(devs, |d| d) {
            Ok(w) => (w < 1e-9, format!("max |A|, |B|, |C| {w:.1e} (tol 1e-9)")),
            Err(e) => (false, e),
        }
    })
}

/// `A E - B F + C G = 0` and `B^2 - 4AC >= 0` at random points of every host.
pub fn structural_identities(points_per_host: usize, seed: u64) -> CheckOutcome {
    timed(7, "structural identities", 10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut orth, mut disc) = (0.0f64, 0.0f64);
        let mut failures = Vec::new();
        for host in ALL_HOSTS {
            for _ in 0..points_per_host {
                let s = random_surface(&mut rng, host);
                let (x, y) = random_disk_point(&mut rng, 0.3);
                match s.screen(x, y) {
                    Ok(sc) => {
                        let p = crate::shape::bde_at(&sc);
                        orth = orth.max(p.orthogonality_residual(&sc.first).abs());
                        let scale = p.max_abs().powi(2).max(1e-300);
                        disc = disc.max(-p.discriminant() / scale);
                    }
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
        let ok = orth < 1e-10 && disc <= 1e-10 && failures.is_empty();
        (ok, format!("max |AE - BF + CG| {orth:.1e} (tol 1e-10), max -(B^2 - 4AC)/scale {disc:.1e} (tol 1e-10), {} evaluation errors", failures.len()))
    })
}

/// Witness portraits: saddle and node counts, and separatrix approach directions.
pub fn portrait_topology() -> CheckOutcome {
    timed(8, "portrait topology", 30, || {
        let witnesses = [((3.0, 1.0, 0.0), 1usize, 0usize), ((3.0, 2.0, 1.0), 2, 1), ((1.0, 2.0, 5.0), 3, 0)];
        let mut ok = true;
        let mut parts = Vec::new();
        for host in HostSurface::ROTATION_HOSTS {
            for ((a, b, c), saddles, nodes) in witnesses {
                let s = Surface::rotation(host, 0.0, a, b, c).expect("rotation host");
                match build_portrait(&s, &PortraitOptions::new(0.2, 12)) {
                    Ok(p) => {
                        let dirs = p.separatrix_directions().len();
                        let err = p.max_approach_error();
                        let good = dirs == saddles && p.node_count() == nodes && err < 1e-3;
                        ok &= good;
                        if !good {
                            parts.push(format!("{} ({a}, {b}, {c}): {dirs} directions, {} nodes, angle {err:.1e}", host.name(), p.node_count()));
                        } else {
                            parts.push(format!("{} ({a}, {b}, {c}) angle {err:.1e}", host.name()));
                        }
                    }
                    Err(e) => {
                        ok = false;
                        parts.push(format!("{} ({a}, {b}, {c}): {e}", host.name()));
                    }
                }
            }
        }
        (ok, parts.join(", "))
    })
}

/// Identical `(k, a, b, c)` on the three rotation hosts give the same 1-jet and verdict.
pub fn cross_host_equivalence(draws: usize, seed: u64) -> CheckOutcome {
    timed(9, "cross-host equivalence", 10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut jet_worst = 0.0f64;
        let mut mismatches = 0;
        let mut failures = Vec::new();
        for _ in 0..draws {
            let k = rng.gen_range(-1.0..=1.0);
            let (a, b, c) = (rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0));
            let mut results = Vec::new();
            for host in HostSurface::ROTATION_HOSTS {
                let s = Surface::rotation(host, k, a, b, c).expect("rotation host");
                match bde_one_jet_numeric(&s, DEFAULT_JET_STEP) {
                    Ok(j) => results.push((j, classify_umbilic(&j, DEFAULT_TOL).class)),
                    Err(e) => failures.push(e.to_string()),
                }
            }
            for (j, class) in results.iter().skip(1) {
                jet_worst = jet_worst.max(j.max_deviation(&results[0].0));
                if *class != results[0].1 {
                    mismatches += 1;
                }
            }
        }
        let ok = jet_worst < 1e-8 && mismatches == 0 && failures.is_empty();
        (ok, format!("max jet difference {jet_worst:.1e} (tol 1e-8), {mismatches} verdict mismatches, {} errors", failures.len()))
    })
}

/// All suites at the given sizes.
pub fn run_all(sizes: &Sizes, seed: u64, margin: f64, fault: JetFault) -> (Vec<CheckOutcome>, Vec<(HostSurface, Report)>) {
    let (cv, reports) = classification_agreement(sizes.cross_validation, seed, margin, fault);
    let outcomes = vec![
        frame_contract(sizes.frame_points, seed),
        eta_one_jet(sizes.lemma_draws, seed),
        bde_one_jet(sizes.graph_jets, seed),
        roots_and_eigenvalues(sizes.root_samples, seed),
        cv,
        xi_umbilicity(sizes.xi_surfaces, sizes.xi_samples, seed),
        structural_identities(sizes.identity_points, seed),
        portrait_topology(),
        cross_host_equivalence(sizes.equivalence_draws, seed),
    ];
    (outcomes, reports)
}
