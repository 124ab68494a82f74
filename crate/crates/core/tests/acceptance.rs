//! Acceptance suite: one pass/fail line per criterion. A criterion also fails
//! when it overruns its wall-clock budget.

use umbilic::checks::{self, CheckOutcome, Sizes};
use umbilic::theorem::{JetFault, DEFAULT_MARGIN};

const SEED: u64 = 42;

fn main() {
    let sizes = Sizes::FULL;
    let criteria: Vec<Box<dyn Fn() -> CheckOutcome>> = vec![
        Box::new(move || checks::frame_contract(sizes.frame_points, SEED)),
        Box::new(move || checks::eta_one_jet(sizes.lemma_draws, SEED)),
        Box::new(move || checks::bde_one_jet(sizes.graph_jets, SEED)),
        Box::new(move || checks::roots_and_eigenvalues(sizes.root_samples, SEED)),
        Box::new(move || checks::classification_agreement(sizes.cross_validation, SEED, DEFAULT_MARGIN, JetFault::None).0),
        Box::new(move || checks::xi_umbilicity(sizes.xi_surfaces, sizes.xi_samples, SEED)),
        Box::new(move || checks::structural_identities(sizes.identity_points, SEED)),
        Box::new(checks::portrait_topology),
        Box::new(move || checks::cross_host_equivalence(sizes.equivalence_draws, SEED)),
    ];
    let mut failed = Vec::new();
    for run in &criteria {
        let outcome = run();
        println!("{}", outcome.line());
        if !(outcome.passed && outcome.within_budget()) {
            failed.push(outcome.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria fail: {:?}", failed.len(), criteria.len(), failed);
        std::process::exit(1);
    }
}
