//! Closed-form Darbouxian classification of rotation-host umbilics in terms of
//! the cubic coefficients `(a, b, c)`, and a harness that checks it against
//! the numerical pipeline.

use crate::error::Result;
use crate::lie_cartan::{bde_one_jet_numeric, classify_umbilic, BdeOneJet, UmbilicClass, DEFAULT_JET_STEP, DEFAULT_TOL};
use crate::surfaces::{HostSurface, Surface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
/// Half-width of the cube `(a, b, c)` is drawn from.
pub const SAMPLE_BOX: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClosedFormClass {
    D1,
    D2,
    D3,
    OutsideClaimedRegion,
    Boundary,
}

impl ClosedFormClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClosedFormClass::D1 => "D1",
            ClosedFormClass::D2 => "D2",
            ClosedFormClass::D3 => "D3",
            ClosedFormClass::OutsideClaimedRegion => "OutsideClaimedRegion",
            ClosedFormClass::Boundary => "Boundary",
        }
    }

    pub fn as_umbilic_class(&self) -> Option<UmbilicClass> {
        match self {
            ClosedFormClass::D1 => Some(UmbilicClass::D1),
            ClosedFormClass::D2 => Some(UmbilicClass::D2),
            ClosedFormClass::D3 => Some(UmbilicClass::D3),
            _ => None,
        }
    }
}

impl fmt::Display for ClosedFormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormVerdict {
    pub class: ClosedFormClass,
    /// `a / b`, absent when `b = 0`.
    pub ratio: Option<f64>,
    /// `(c / 2b)^2 + 2`, absent when `b = 0`.
    pub threshold: Option<f64>,
    /// Signs of `a`, `b`, `c`.
    pub signs: [i8; 3],
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Applies the clause list of the rotation-host classification verbatim:
///
/// * D1 iff `a/b > (c/2b)^2 + 2` and (`a > b > 0` or `a < b < 0`);
/// * D2 iff (`2 < a/b < (c/2b)^2 + 2`, `a < b < 0`, `c > 0`) or (`1 < a/b < 2`, `b > 0`);
/// * D3 iff (`2 < a/b < (c/2b)^2 + 2`, `a > b > 0`, `c != 0`) or (`a/b < 1`, `c != 0`).
///
/// Points within `margin` of `b = 0` (relative to `max(|a|, |b|, |c|)`), of
/// `a/b` in `{1, 2, (c/2b)^2 + 2}`, or of `c = 0` where a clause depends on the
/// sign of `c`, are `Boundary`.
pub fn classify_closed_form(a: f64, b: f64, c: f64, margin: f64) -> ClosedFormVerdict {
    let signs = [sign(a), sign(b), sign(c)];
    let s = a.abs().max(b.abs()).max(c.abs());
    let boundary = |ratio, threshold| ClosedFormVerdict { class: ClosedFormClass::Boundary, ratio, threshold, signs };
    if !(s > 0.0) || b.abs() / s < margin {
        let ratio = (b != 0.0).then(|| a / b);
        return boundary(ratio, ratio.map(|_| (c / (2.0 * b)).powi(2) + 2.0));
    }
    let r = a / b;
    let t = (c / (2.0 * b)).powi(2) + 2.0;
    if (r - 1.0).abs() < margin || (r - 2.0).abs() < margin || (r - t).abs() < margin {
        return boundary(Some(r), Some(t));
    }
    // only the clauses for a/b < 1 and 2 < a/b < T name the sign of c
    if (r < 1.0 || (2.0 < r && r < t)) && c.abs() / s < margin {
        return boundary(Some(r), Some(t));
    }
    let same_order = (a > b && b > 0.0) || (a < b && b < 0.0);
    let class = if r > t && same_order {
        ClosedFormClass::D1
    } else if (2.0 < r && r < t && a < b && b < 0.0 && c > 0.0) || (1.0 < r && r < 2.0 && b > 0.0) {
        ClosedFormClass::D2
    } else if (2.0 < r && r < t && a > b && b > 0.0 && c != 0.0) || (r < 1.0 && c != 0.0) {
        ClosedFormClass::D3
    } else {
        ClosedFormClass::OutsideClaimedRegion
    };
    ClosedFormVerdict { class, ratio: Some(r), threshold: Some(t), signs }
}

/// Deliberate convention errors injected between the numeric 1-jet and the
/// classifier, to check that the harness notices them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetFault {
    #[default]
    None,
    /// Mistake the full-`B` coefficients for half-convention ones in `B_y`.
    HalveB2,
}

impl JetFault {
    pub fn apply(&self, j: BdeOneJet) -> BdeOneJet {
        match self {
            JetFault::None => j,
            JetFault::HalveB2 => BdeOneJet { b2: 0.5 * j.b2, ..j },
        }
    }
}

impl std::str::FromStr for JetFault {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(JetFault::None),
            "halve-b2" => Ok(JetFault::HalveB2),
            other => Err(format!("unknown fault '{other}' (expected none or halve-b2)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub host: HostSurface,
    pub samples: usize,
    pub margin: f64,
    pub seed: u64,
    pub k: f64,
    pub jet_step: f64,
    pub tol: f64,
    pub fault: JetFault,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl CrossValidation {
    pub fn new(host: HostSurface) -> Self {
        Self {
            host,
            samples: DEFAULT_SAMPLES,
            margin: DEFAULT_MARGIN,
            seed: DEFAULT_SEED,
            k: 0.0,
            jet_step: DEFAULT_JET_STEP,
            tol: DEFAULT_TOL,
            fault: JetFault::None,
            threads: 0,
        }
    }

    /// The parameter triples drawn for this configuration, in order.
    pub fn draws(&self) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.samples)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-SAMPLE_BOX..=SAMPLE_BOX)))
            .collect()
    }

    pub fn run(&self) -> Report {
        let draws = self.draws();
        let threads = match self.threads {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        };
        let chunk = draws.len().div_ceil(threads).max(1);
        std::thread::scope(|scope| {
            let handles: Vec<_> = draws
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter().fold(Report::default(), |mut rep, &[a, b, c]| {
                            rep.push(self.evaluate(a, b, c));
                            rep
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("cross-validation worker panicked"))
                .fold(Report::default(), Report::merge)
        })
    }

    /// Closed form and numerical pipeline for one parameter triple.
    pub fn evaluate(&self, a: f64, b: f64, c: f64) -> SampleRecord {
        let closed = classify_closed_form(a, b, c, self.margin);
        let numeric = self.numeric_verdict(a, b, c);
        let (numeric, roots, betas) = match numeric {
            Ok(v) => (
                v.class.as_str().to_string(),
                v.singularities.iter().map(|s| s.z).collect(),
                v.singularities.iter().map(|s| [s.beta2, s.beta3]).collect(),
            ),
            Err(e) => (format!("error: {e}"), vec![], vec![]),
        };
        SampleRecord { a, b, c, closed_form: closed.class, numeric, roots, betas }
    }

    fn numeric_verdict(&self, a: f64, b: f64, c: f64) -> Result<crate::lie_cartan::UmbilicVerdict> {
        let surface = Surface::rotation(self.host, self.k, a, b, c)?;
        let jet = self.fault.apply(bde_one_jet_numeric(&surface, self.jet_step)?);
        Ok(classify_umbilic(&jet, self.tol))
    }
}

/// One sampled parameter triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub closed_form: ClosedFormClass,
    /// Numerical class name, or the pipeline error.
    pub numeric: String,
    pub roots: Vec<f64>,
    pub betas: Vec<[f64; 2]>,
}

impl SampleRecord {
    /// Whether the closed form makes a claim about this sample.
    pub fn is_claimed(&self) -> bool {
        self.closed_form.as_umbilic_class().is_some()
    }

    pub fn agrees(&self) -> bool {
        self.closed_form.as_umbilic_class().is_some_and(|c| c.as_str() == self.numeric)
    }
}

/// Mergeable cross-validation report; `merge` is associative and keeps
/// sample order, so chunked runs concatenate to the sequential result.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<SampleRecord>,
    /// `closed_form/numeric` pair counts over all samples.
    pub histogram: BTreeMap<String, usize>,
}

impl Report {
    pub fn push(&mut self, record: SampleRecord) {
        *self.histogram.entry(format!("{}/{}", record.closed_form, record.numeric_label())).or_default() += 1;
        self.records.push(record);
    }

    pub fn merge(mut self, other: Report) -> Report {
        self.records.extend(other.records);
        for (key, n) in other.histogram {
            *self.histogram.entry(key).or_default() += n;
        }
        self
    }

    pub fn samples(&self) -> usize {
        self.records.len()
    }

    pub fn claimed(&self) -> usize {
        self.records.iter().filter(|r| r.is_claimed()).count()
    }

    pub fn agreements(&self) -> usize {
        self.records.iter().filter(|r| r.agrees()).count()
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(|r| r.is_claimed() && !r.agrees())
    }

    pub fn count(&self, class: ClosedFormClass) -> usize {
        self.records.iter().filter(|r| r.closed_form == class).count()
    }

    pub fn all_agree(&self) -> bool {
        self.disagreements().next().is_none()
    }

    pub fn summary(&self) -> ReportSummary {
        let claimed = self.claimed();
        let agreements = self.agreements();
        ReportSummary {
            samples: self.samples(),
            claimed,
            boundary: self.count(ClosedFormClass::Boundary),
            outside_claimed_region: self.count(ClosedFormClass::OutsideClaimedRegion),
            agreements,
            disagreements: claimed - agreements,
            agreement_rate: if claimed == 0 { 1.0 } else { agreements as f64 / claimed as f64 },
            histogram: self.histogram.clone(),
            disagreement_witnesses: self.disagreements().take(20).cloned().collect(),
        }
    }

    /// Writes one row per sample with columns `a,b,c,closed_form,numeric,roots,betas`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a", "b", "c", "closed_form", "numeric", "roots", "betas"])?;
        for r in &self.records {
            let roots = r.roots.iter().map(|z| format!("{z:.12e}")).collect::<Vec<_>>().join(";");
            let betas = r.betas.iter().map(|[p, q]| format!("{p:.12e}:{q:.12e}")).collect::<Vec<_>>().join(";");
            w.write_record([
                format!("{:.17e}", r.a),
                format!("{:.17e}", r.b),
                format!("{:.17e}", r.c),
                r.closed_form.to_string(),
                r.numeric.clone(),
                roots,
                betas,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl SampleRecord {
    fn numeric_label(&self) -> &str {
        if self.numeric.starts_with("error") {
            "error"
        } else {
            &self.numeric
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub samples: usize,
    pub claimed: usize,
    pub boundary: usize,
    pub outside_claimed_region: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub agreement_rate: f64,
    pub histogram: BTreeMap<String, usize>,
    /// The first few disagreeing samples.
    pub disagreement_witnesses: Vec<SampleRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(classify_closed_form(3.0, 1.0, 0.0, DEFAULT_MARGIN).class, ClosedFormClass::D1);
        assert_eq!(classify_closed_form(3.0, 2.0, 1.0, DEFAULT_MARGIN).class, ClosedFormClass::D2);
        assert_eq!(classify_closed_form(1.0, 2.0, 5.0, DEFAULT_MARGIN).class, ClosedFormClass::D3);
        let v = classify_closed_form(3.0, 2.0, 1.0, DEFAULT_MARGIN);
        assert_eq!(v.ratio, Some(1.5));
        assert_eq!(v.threshold, Some(2.0625));
        assert_eq!(v.signs, [1, 1, 1]);
    }

    #[test]
    fn boundaries() {
        let m = DEFAULT_MARGIN;
        assert_eq!(classify_closed_form(1.0, 0.01, 1.0, m).class, ClosedFormClass::Boundary);
        assert_eq!(classify_closed_form(2.0, 2.0, 1.0, m).class, ClosedFormClass::Boundary);
        assert_eq!(classify_closed_form(4.0, 2.0, 1.0, m).class, ClosedFormClass::Boundary);
        // a/b = (c/2b)^2 + 2
        assert_eq!(classify_closed_form(2.25, 1.0, 1.0, m).class, ClosedFormClass::Boundary);
        assert_eq!(classify_closed_form(0.5, 1.0, 0.01, m).class, ClosedFormClass::Boundary);
        assert_eq!(classify_closed_form(0.0, 0.0, 0.0, m).class, ClosedFormClass::Boundary);
    }

    #[test]
    fn uncovered_patterns_are_reported() {
        // 1 < a/b < 2 with b < 0 is not named by any clause
        assert_eq!(classify_closed_form(-3.0, -2.0, 1.0, DEFAULT_MARGIN).class, ClosedFormClass::OutsideClaimedRegion);
        // 2 < a/b < T with a < b < 0 but c < 0
        assert_eq!(classify_closed_form(-2.5, -1.0, -3.0, DEFAULT_MARGIN).class, ClosedFormClass::OutsideClaimedRegion);
    }

    proptest! {
        #[test]
        fn closed_form_is_scale_invariant(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, s in 0.01..100.0f64) {
            let v = classify_closed_form(a, b, c, DEFAULT_MARGIN).class;
            let w = classify_closed_form(s * a, s * b, s * c, DEFAULT_MARGIN).class;
            // margin tests are ratios, so only rounding at the margin edge can differ
            if v != w {
                prop_assert!(v == ClosedFormClass::Boundary || w == ClosedFormClass::Boundary);
            }
        }

        #[test]
        fn clauses_are_disjoint(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
            prop_assume!(b != 0.0);
            let r = a / b;
            let t = (c / (2.0 * b)).powi(2) + 2.0;
            let d1 = r > t && ((a > b && b > 0.0) || (a < b && b < 0.0));
            let d2 = (2.0 < r && r < t && a < b && b < 0.0 && c > 0.0) || (1.0 < r && r < 2.0 && b > 0.0);
            let d3 = (2.0 < r && r < t && a > b && b > 0.0 && c != 0.0) || (r < 1.0 && c != 0.0);
            prop_assert!(u8::from(d1) + u8::from(d2) + u8::from(d3) <= 1);
        }
    }

    #[test]
    fn report_merge_matches_sequential_run() {
        let mut cv = CrossValidation::new(HostSurface::NullHyperplane);
        cv.samples = 64;
        cv.threads = 1;
        let sequential = cv.run();
        cv.threads = 5;
        let parallel = cv.run();
        assert_eq!(sequential, parallel);
        assert_eq!(sequential.histogram.values().sum::<usize>(), 64);
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let mut cv = CrossValidation::new(HostSurface::LightCone3);
        cv.samples = 10;
        let report = cv.run();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.starts_with("a,b,c,closed_form,numeric,roots,betas"));
    }

    #[test]
    fn halved_b2_is_caught() {
        let mut cv = CrossValidation::new(HostSurface::NullHyperplane);
        cv.samples = 400;
        cv.fault = JetFault::HalveB2;
        let report = cv.run();
        assert!(report.disagreements().count() > 0);
    }
}
