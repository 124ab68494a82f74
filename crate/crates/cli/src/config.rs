//! Flat `key = value` run configuration.

use std::fmt::Write;
use std::str::FromStr;
use thiserror::Error;
use umbilic::integrate::Family;
use umbilic::surfaces::{CubicForm, FJet, HostSurface, Surface};
use umbilic::theorem::JetFault;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    Duplicate { line: usize, key: String },
    #[error("bad value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// Which foliations a portrait draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FamilySelection {
    #[default]
    Both,
    One(Family),
}

impl FamilySelection {
    pub fn families(&self) -> Vec<Family> {
        match self {
            FamilySelection::Both => Family::BOTH.to_vec(),
            FamilySelection::One(f) => vec![*f],
        }
    }
}

impl FromStr for FamilySelection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "both" => Ok(FamilySelection::Both),
            other => other.parse().map(FamilySelection::One),
        }
    }
}

impl std::fmt::Display for FamilySelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilySelection::Both => f.write_str("both"),
            FamilySelection::One(fam) => write!(f, "{fam}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub host: String,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    // graph host: quadratic part of g, 3-jet of f, cubic part of g
    pub gxx: f64,
    pub gyy: f64,
    pub f_xxx: f64,
    pub f_xxy: f64,
    pub f_xyy: f64,
    pub f_yyy: f64,
    pub g_xxx: f64,
    pub g_xxy: f64,
    pub g_xyy: f64,
    pub g_yyy: f64,
    pub tol: f64,
    pub jet_step: f64,
    pub step_tol: f64,
    pub margin: f64,
    pub seed: u64,
    pub samples: usize,
    pub threads: usize,
    pub radius: f64,
    pub seeds: usize,
    pub family: FamilySelection,
    pub inject_fault: JetFault,
    pub output: Option<String>,
    pub json_output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            host: "light-cone".into(),
            k: 0.0,
            a: 3.0,
            b: 1.0,
            c: 0.0,
            gxx: 0.0,
            gyy: 0.0,
            f_xxx: 0.0,
            f_xxy: 0.0,
            f_xyy: 0.0,
            f_yyy: 0.0,
            g_xxx: 0.0,
            g_xxy: 0.0,
            g_xyy: 0.0,
            g_yyy: 0.0,
            tol: umbilic::lie_cartan::DEFAULT_TOL,
            jet_step: umbilic::lie_cartan::DEFAULT_JET_STEP,
            step_tol: umbilic::integrate::DEFAULT_STEP_TOL,
            margin: umbilic::theorem::DEFAULT_MARGIN,
            seed: umbilic::theorem::DEFAULT_SEED,
            samples: umbilic::theorem::DEFAULT_SAMPLES,
            threads: 0,
            radius: 0.2,
            seeds: 16,
            family: FamilySelection::Both,
            inject_fault: JetFault::None,
            output: None,
            json_output: None,
        }
    }
}

fn fault_name(f: JetFault) -> &'static str {
    match f {
        JetFault::None => "none",
        JetFault::HalveB2 => "halve-b2",
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), value: value.into(), reason: e.to_string() })
}

impl RunConfig {
    /// Keys in serialization order.
    pub const KEYS: [&'static str; 28] = [
        "host", "k", "a", "b", "c", "gxx", "gyy", "f_xxx", "f_xxy", "f_xyy", "f_yyy", "g_xxx", "g_xxy", "g_xyy",
        "g_yyy", "tol", "jet_step", "step_tol", "margin", "seed", "samples", "threads", "radius", "seeds", "family",
        "inject_fault", "output", "json_output",
    ];

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "host" => {
                parse::<HostSurface>(key, value)?;
                self.host = value.to_string();
            }
            "k" => self.k = parse(key, value)?,
            "a" => self.a = parse(key, value)?,
            "b" => self.b = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "gxx" => self.gxx = parse(key, value)?,
            "gyy" => self.gyy = parse(key, value)?,
            "f_xxx" => self.f_xxx = parse(key, value)?,
            "f_xxy" => self.f_xxy = parse(key, value)?,
            "f_xyy" => self.f_xyy = parse(key, value)?,
            "f_yyy" => self.f_yyy = parse(key, value)?,
            "g_xxx" => self.g_xxx = parse(key, value)?,
            "g_xxy" => self.g_xxy = parse(key, value)?,
            "g_xyy" => self.g_xyy = parse(key, value)?,
            "g_yyy" => self.g_yyy = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "jet_step" => self.jet_step = parse(key, value)?,
            "step_tol" => self.step_tol = parse(key, value)?,
            "margin" => self.margin = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "radius" => self.radius = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "family" => self.family = parse(key, value)?,
            "inject_fault" => self.inject_fault = parse(key, value)?,
            "output" => self.output = (!value.is_empty()).then(|| value.to_string()),
            "json_output" => self.json_output = (!value.is_empty()).then(|| value.to_string()),
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.to_string() }),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "host" => self.host.clone(),
            "k" => self.k.to_string(),
            "a" => self.a.to_string(),
            "b" => self.b.to_string(),
            "c" => self.c.to_string(),
            "gxx" => self.gxx.to_string(),
            "gyy" => self.gyy.to_string(),
            "f_xxx" => self.f_xxx.to_string(),
            "f_xxy" => self.f_xxy.to_string(),
            "f_xyy" => self.f_xyy.to_string(),
            "f_yyy" => self.f_yyy.to_string(),
            "g_xxx" => self.g_xxx.to_string(),
            "g_xxy" => self.g_xxy.to_string(),
            "g_xyy" => self.g_xyy.to_string(),
            "g_yyy" => self.g_yyy.to_string(),
            "tol" => self.tol.to_string(),
            "jet_step" => self.jet_step.to_string(),
            "step_tol" => self.step_tol.to_string(),
            "margin" => self.margin.to_string(),
            "seed" => self.seed.to_string(),
            "samples" => self.samples.to_string(),
            "threads" => self.threads.to_string(),
            "radius" => self.radius.to_string(),
            "seeds" => self.seeds.to_string(),
            "family" => self.family.to_string(),
            "inject_fault" => fault_name(self.inject_fault).to_string(),
            "output" => self.output.clone().unwrap_or_default(),
            "json_output" => self.json_output.clone().unwrap_or_default(),
            _ => unreachable!("all keys are listed"),
        }
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) =
                body.split_once('=').ok_or_else(|| ConfigError::Syntax { line, text: raw.to_string() })?;
            let (key, value) = (key.trim(), value.trim());
            if !Self::KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    /// Every key, one per line, in a form [`RunConfig::parse`] reads back exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    pub fn host(&self) -> Result<HostSurface, ConfigError> {
        let host: HostSurface = parse("host", &self.host)?;
        Ok(match host {
            HostSurface::GenericGraph(_) => HostSurface::GenericGraph(self.f_jet()),
            h => h,
        })
    }

    fn f_jet(&self) -> FJet {
        FJet { f0: 0.0, a: self.f_xxx, d: self.f_xxy, b: self.f_xyy, c: self.f_yyy }
    }

    pub fn g_cubic(&self) -> CubicForm {
        CubicForm::new(self.g_xxx, self.g_xxy, self.g_xyy, self.g_yyy)
    }

    pub fn surface(&self) -> Result<Surface, ConfigError> {
        let invalid = |e: umbilic::Error| ConfigError::Invalid(e.to_string());
        match self.host()? {
            HostSurface::GenericGraph(f) => Ok(Surface::generic(self.k, self.gxx, self.gyy, f, self.g_cubic())),
            h => Surface::rotation(h, self.k, self.a, self.b, self.c).map_err(invalid),
        }
    }

    /// Range checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.host()?;
        let positive = [("tol", self.tol), ("jet_step", self.jet_step), ("step_tol", self.step_tol), ("margin", self.margin), ("radius", self.radius)];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Value { key: key.into(), value: v.to_string(), reason: "must be positive".into() });
            }
        }
        let params = [self.k, self.a, self.b, self.c, self.gxx, self.gyy, self.f_xxx, self.f_xxy, self.f_xyy, self.f_yyy, self.g_xxx, self.g_xxy, self.g_xyy, self.g_yyy];
        if params.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid("surface parameters must be finite".into()));
        }
        if self.samples == 0 {
            return Err(ConfigError::Value { key: "samples".into(), value: "0".into(), reason: "must be positive".into() });
        }
        if self.seeds == 0 {
            return Err(ConfigError::Value { key: "seeds".into(), value: "0".into(), reason: "must be positive".into() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }

    #[test]
    fn awkward_values_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.a = 0.1 + 0.2;
        cfg.b = -1e-300;
        cfg.c = std::f64::consts::PI;
        cfg.host = "cylinder".into();
        cfg.family = FamilySelection::One(Family::Two);
        cfg.inject_fault = JetFault::HalveB2;
        cfg.output = Some("out dir/report.csv".into());
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = RunConfig::parse("# witness\n\nhost = null-plane\na = 3 # inline\nb=2\nc = 1\n").unwrap();
        assert_eq!((cfg.host.as_str(), cfg.a, cfg.b, cfg.c), ("null-plane", 3.0, 2.0, 1.0));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(RunConfig::parse("colour = red"), Err(ConfigError::UnknownKey { line: 1, .. })));
        assert!(matches!(RunConfig::parse("a 3"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RunConfig::parse("a = x"), Err(ConfigError::Value { .. })));
        assert!(matches!(RunConfig::parse("a = 1\na = 2"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(RunConfig::parse("host = torus"), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn graph_surface_from_config() {
        let cfg = RunConfig::parse("host = generic\nk = 0.5\nf_xxx = 1\ng_yyy = 2").unwrap();
        let s = cfg.surface().unwrap();
        assert!(matches!(s.host(), HostSurface::GenericGraph(f) if f.a == 1.0));
        assert_eq!(s.g().cubic.yyy, 2.0);
    }
}
