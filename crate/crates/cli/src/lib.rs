//! Command-line front end for the `umbilic` library.

pub mod config;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, FamilySelection, RunConfig};
use serde::Serialize;
use std::io::Write;
use umbilic::checks::{self, Sizes};
use umbilic::integrate::{build_portrait, PortraitOptions};
use umbilic::lie_cartan::{bde_one_jet_numeric, classify_umbilic, BdeOneJet, UmbilicClass, UmbilicVerdict};
use umbilic::render::{portrait_json, portrait_svg};
use umbilic::surfaces::HostSurface;
use umbilic::theorem::{classify_closed_form, ClosedFormVerdict, CrossValidation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "umbilic", version, about = "Classify and draw principal configurations around umbilics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the umbilic at the origin; prints a JSON verdict.
    Classify(Overrides),
    /// Cross-validate the closed-form classification over random parameters; writes CSV.
    Sweep(Overrides),
    /// Draw the principal configuration around the umbilic as SVG.
    Portrait(Overrides),
    /// Run the verification suites and the cross-validation.
    Verify(Overrides),
    /// Print the numeric and closed-form 1-jets of the principal-line equation.
    Jet(Overrides),
}

/// Flags override values read from `--config`, which override the defaults.
#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct Overrides {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<String>,
    /// null-plane, light-cone, cylinder or generic.
    #[arg(long)]
    pub host: Option<String>,
    #[arg(short = 'k', long)]
    pub k: Option<f64>,
    #[arg(short = 'a', long)]
    pub a: Option<f64>,
    #[arg(short = 'b', long)]
    pub b: Option<f64>,
    #[arg(short = 'c', long)]
    pub c: Option<f64>,
    /// Graph host: second derivative of g in x at the umbilic.
    #[arg(long)]
    pub gxx: Option<f64>,
    #[arg(long)]
    pub gyy: Option<f64>,
    /// Graph host: third derivatives of f.
    #[arg(long)]
    pub f_xxx: Option<f64>,
    #[arg(long)]
    pub f_xxy: Option<f64>,
    #[arg(long)]
    pub f_xyy: Option<f64>,
    #[arg(long)]
    pub f_yyy: Option<f64>,
    /// Graph host: third derivatives of g.
    #[arg(long)]
    pub g_xxx: Option<f64>,
    #[arg(long)]
    pub g_xxy: Option<f64>,
    #[arg(long)]
    pub g_xyy: Option<f64>,
    #[arg(long)]
    pub g_yyy: Option<f64>,
    /// Root spacing / transversality tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Base step of the Richardson 1-jet.
    #[arg(long)]
    pub jet_step: Option<f64>,
    /// Local error tolerance of the curve integrator.
    #[arg(long)]
    pub step_tol: Option<f64>,
    /// Boundary margin of the closed-form classification.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Portrait radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Portrait seeds per family.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// 1, 2 or both.
    #[arg(long)]
    pub family: Option<String>,
    /// Deliberate convention error for harness checks: none or halve-b2.
    #[arg(long)]
    pub inject_fault: Option<String>,
    #[arg(short = 'o', long)]
    pub output: Option<String>,
    /// Portrait: also dump geometry as JSON here.
    #[arg(long)]
    pub json_output: Option<String>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError::Invalid(format!("cannot read {path}: {e}")))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        let numbers = [
            ("k", self.k),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("gxx", self.gxx),
            ("gyy", self.gyy),
            ("f_xxx", self.f_xxx),
            ("f_xxy", self.f_xxy),
            ("f_xyy", self.f_xyy),
            ("f_yyy", self.f_yyy),
            ("g_xxx", self.g_xxx),
            ("g_xxy", self.g_xxy),
            ("g_xyy", self.g_xyy),
            ("g_yyy", self.g_yyy),
            ("tol", self.tol),
            ("jet_step", self.jet_step),
            ("step_tol", self.step_tol),
            ("margin", self.margin),
            ("radius", self.radius),
        ];
        for (key, v) in numbers {
            if let Some(v) = v {
                cfg.set(key, &v.to_string())?;
            }
        }
        let texts = [
            ("host", self.host.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("samples", self.samples.map(|v| v.to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
            ("seeds", self.seeds.map(|v| v.to_string())),
            ("family", self.family.clone()),
            ("inject_fault", self.inject_fault.clone()),
            ("output", self.output.clone()),
            ("json_output", self.json_output.clone()),
        ];
        for (key, v) in texts {
            if let Some(v) = v {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Stdout and stderr of a command, kept apart so tests can inspect them.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

pub fn run(cli: Cli, io: &mut Io) -> i32 {
    let (overrides, cmd): (&Overrides, fn(&RunConfig, &mut Io) -> i32) = match &cli.command {
        Command::Classify(o) => (o, cmd_classify),
        Command::Sweep(o) => (o, cmd_sweep),
        Command::Portrait(o) => (o, cmd_portrait),
        Command::Verify(o) => (o, cmd_verify),
        Command::Jet(o) => (o, cmd_jet),
    };
    let cfg = match overrides.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(io.err, "config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if overrides.print_config {
        let _ = write!(io.out, "{}", cfg.serialize());
        return EXIT_OK;
    }
    cmd(&cfg, io)
}

fn fail(io: &mut Io, code: i32, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(io.err, "{msg}");
    code
}

fn pipeline_error(io: &mut Io, e: umbilic::Error) -> i32 {
    let code = match e {
        umbilic::Error::InvalidParameter(_) | umbilic::Error::InvalidStep { .. } => EXIT_CONFIG,
        _ => EXIT_DEGENERATE,
    };
    fail(io, code, format!("error: {e}"))
}

fn write_output(path: &str, contents: &[u8]) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {path}: {e}"))
}

#[derive(Serialize)]
struct Conditions {
    simple: bool,
    transversal: bool,
    transversality: f64,
}

#[derive(Serialize)]
struct ClassifyReport {
    host: &'static str,
    closed_form: Option<ClosedFormVerdict>,
    numeric: UmbilicClass,
    roots: Vec<f64>,
    betas: Vec<[f64; 2]>,
    kinds: Vec<String>,
    conditions: Conditions,
    jet: BdeOneJet,
}

fn numeric_verdict(cfg: &RunConfig) -> Result<(HostSurface, UmbilicVerdict), umbilic::Error> {
    let surface = cfg.surface().map_err(|e| umbilic::Error::InvalidParameter(e.to_string()))?;
    let jet = cfg.inject_fault.apply(bde_one_jet_numeric(&surface, cfg.jet_step)?);
    Ok((surface.host(), classify_umbilic(&jet, cfg.tol)))
}

pub fn cmd_classify(cfg: &RunConfig, io: &mut Io) -> i32 {
    let (host, verdict) = match numeric_verdict(cfg) {
        Ok(v) => v,
        Err(e) => return pipeline_error(io, e),
    };
    let closed_form = host.is_rotation().then(|| classify_closed_form(cfg.a, cfg.b, cfg.c, cfg.margin));
    let transversal = !matches!(verdict.class, UmbilicClass::NotSimple | UmbilicClass::NotTransversal);
    let report = ClassifyReport {
        host: host.name(),
        closed_form,
        numeric: verdict.class,
        roots: verdict.singularities.iter().map(|s| s.z).collect(),
        betas: verdict.singularities.iter().map(|s| [s.beta2, s.beta3]).collect(),
        kinds: verdict.singularities.iter().map(|s| s.kind.to_string()).collect(),
        conditions: Conditions {
            // with C = -A the discriminant has a nondegenerate minimum exactly under transversality
            simple: transversal,
            transversal,
            transversality: verdict.transversality,
        },
        jet: verdict.jet,
    };
    let _ = writeln!(io.out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if verdict.class.is_darbouxian() {
        return EXIT_OK;
    }
    let reason = if host.is_rotation() {
        format!("{}: b(b-a)={}", verdict.class, cfg.b * (cfg.b - cfg.a))
    } else {
        format!("{}: a1 b2 - a2 b1 = {:e}", verdict.class, verdict.transversality)
    };
    fail(io, EXIT_DEGENERATE, reason)
}

fn cross_validation(cfg: &RunConfig, host: HostSurface) -> CrossValidation {
    let mut cv = CrossValidation::new(host);
    cv.samples = cfg.samples;
    cv.margin = cfg.margin;
    cv.seed = cfg.seed;
    cv.k = cfg.k;
    cv.jet_step = cfg.jet_step;
    cv.tol = cfg.tol;
    cv.fault = cfg.inject_fault;
    cv.threads = cfg.threads;
    cv
}

fn rotation_host(cfg: &RunConfig, io: &mut Io) -> Result<HostSurface, i32> {
    match cfg.host() {
        Ok(h) if h.is_rotation() => Ok(h),
        Ok(h) => Err(fail(io, EXIT_CONFIG, format!("config error: the closed-form classification covers rotation hosts only, got {h}"))),
        Err(e) => Err(fail(io, EXIT_CONFIG, format!("config error: {e}"))),
    }
}

pub fn cmd_sweep(cfg: &RunConfig, io: &mut Io) -> i32 {
    let host = match rotation_host(cfg, io) {
        Ok(h) => h,
        Err(code) => return code,
    };
    let report = cross_validation(cfg, host).run();
    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("writing to memory");
    let summary = serde_json::to_string_pretty(&report.summary()).expect("summary serializes");
    match &cfg.output {
        Some(path) => {
            if let Err(e) = write_output(path, &csv) {
                return fail(io, EXIT_CONFIG, e);
            }
            let _ = writeln!(io.out, "{summary}");
        }
        None => {
            let _ = io.out.write_all(&csv);
            let _ = writeln!(io.err, "{summary}");
        }
    }
    EXIT_OK
}

pub fn cmd_portrait(cfg: &RunConfig, io: &mut Io) -> i32 {
    let surface = match cfg.surface() {
        Ok(s) => s,
        Err(e) => return fail(io, EXIT_CONFIG, format!("config error: {e}")),
    };
    let Some(path) = cfg.output.clone() else {
        return fail(io, EXIT_CONFIG, "config error: portrait needs --output");
    };
    let mut opts = PortraitOptions::new(cfg.radius, cfg.seeds);
    opts.families = cfg.family.families();
    opts.tol = cfg.step_tol;
    opts.jet_step = cfg.jet_step;
    opts.classify_tol = cfg.tol;
    let portrait = match build_portrait(&surface, &opts) {
        Ok(p) => p,
        Err(e) => return pipeline_error(io, e),
    };
    if let Err(e) = write_output(&path, portrait_svg(&portrait).as_bytes()) {
        return fail(io, EXIT_CONFIG, e);
    }
    if let Some(json_path) = &cfg.json_output {
        let json = portrait_json(&portrait).expect("portrait serializes");
        if let Err(e) = write_output(json_path, json.as_bytes()) {
            return fail(io, EXIT_CONFIG, e);
        }
    }
    let family = match cfg.family {
        FamilySelection::Both => "both".to_string(),
        FamilySelection::One(f) => f.to_string(),
    };
    let _ = writeln!(
        io.out,
        "{}: {} separatrix directions, {} nodes, {} curves (family {family}) -> {path}",
        portrait.verdict.class,
        portrait.separatrix_directions().len(),
        portrait.node_count(),
        portrait.curves.len()
    );
    EXIT_OK
}

/// Suite sizes for `verify`: the cross-validation uses `samples`, the
/// property suites keep their full sizes.
fn verify_sizes(cfg: &RunConfig) -> Sizes {
    Sizes { cross_validation: cfg.samples, ..Sizes::FULL }
}

pub fn cmd_verify(cfg: &RunConfig, io: &mut Io) -> i32 {
    let (outcomes, reports) = checks::run_all(&verify_sizes(cfg), cfg.seed, cfg.margin, cfg.inject_fault);
    for o in &outcomes {
        let _ = writeln!(io.out, "{}", o.line());
    }
    let host = cfg.host().ok().filter(|h| h.is_rotation()).unwrap_or(HostSurface::LightCone3);
    let path = cfg.output.clone().unwrap_or_else(|| "verify_report.csv".into());
    if let Some((_, report)) = reports.iter().find(|(h, _)| *h == host) {
        let mut csv = Vec::new();
        report.write_csv(&mut csv).expect("writing to memory");
        if let Err(e) = write_output(&path, &csv) {
            return fail(io, EXIT_CONFIG, e);
        }
        let _ = writeln!(io.out, "cross-validation report for {} written to {path}", host.name());
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    if failed.is_empty() {
        let _ = writeln!(io.out, "verify: all {} suites pass", outcomes.len());
        return EXIT_OK;
    }
    let _ = writeln!(io.err, "verify: {} of {} suites fail", failed.len(), outcomes.len());
    for o in &failed {
        let _ = writeln!(io.err, "  {} {}: {}", o.id, o.name, o.detail);
    }
    let mut shown = 0;
    for (h, report) in &reports {
        for d in report.disagreements().take(20 - shown.min(20)) {
            let _ = writeln!(
                io.err,
                "  disagreement {}: a={:.6} b={:.6} c={:.6} closed_form={} numeric={}",
                h.name(),
                d.a,
                d.b,
                d.c,
                d.closed_form,
                d.numeric
            );
            shown += 1;
        }
    }
    EXIT_VERIFY_FAILED
}

#[derive(Serialize)]
struct JetReport {
    host: &'static str,
    numeric: BdeOneJet,
    closed_form: BdeOneJet,
    max_deviation: f64,
    /// Best factor `s` with `numeric ~ s * closed_form`.
    ratio: f64,
}

pub fn cmd_jet(cfg: &RunConfig, io: &mut Io) -> i32 {
    let surface = match cfg.surface() {
        Ok(s) => s,
        Err(e) => return fail(io, EXIT_CONFIG, format!("config error: {e}")),
    };
    let numeric = match bde_one_jet_numeric(&surface, cfg.jet_step) {
        Ok(j) => cfg.inject_fault.apply(j),
        Err(e) => return pipeline_error(io, e),
    };
    let closed_form = match surface.host() {
        HostSurface::GenericGraph(f) => BdeOneJet::graph_closed_form(&f, &surface.g().cubic),
        _ => BdeOneJet::rotation_closed_form(cfg.a, cfg.b, cfg.c),
    };
    let dot = |u: &BdeOneJet, v: &BdeOneJet| u.a1 * v.a1 + u.a2 * v.a2 + u.b1 * v.b1 + u.b2 * v.b2;
    let norm = dot(&closed_form, &closed_form);
    let report = JetReport {
        host: surface.host().name(),
        numeric,
        closed_form,
        max_deviation: numeric.max_deviation(&closed_form),
        ratio: if norm > 0.0 { dot(&numeric, &closed_form) / norm } else { f64::NAN },
    };
    let _ = writeln!(io.out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    EXIT_OK
}
