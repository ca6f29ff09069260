//! Run configuration: a versioned JSON document, optionally overridden by
//! command-line flags, validated into a [`BenchmarkCase`] before any solve.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tidg_core::assembly::{Method, MethodConfig, StabilizationParams};
use tidg_core::bench::{Benchmark, BenchmarkCase, DEFAULT_NU};
use tidg_core::solver::DEFAULT_TOLERANCE;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Finest refinement level accepted per benchmark. Cook level 7 is a
/// 128×128 grid; beam level 5 is 320×64 cells.
const MAX_COOK_LEVEL: u32 = 7;
const MAX_BEAM_LEVEL: u32 = 5;

/// An angle given either in radians or as a multiple of π such as `"3pi/4"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Expr(String),
}

impl AngleSpec {
    pub fn radians(&self) -> Result<f64> {
        match self {
            AngleSpec::Radians(v) => Ok(*v),
            AngleSpec::Expr(s) => parse_angle(s),
        }
    }
}

/// Parses `1.2`, `pi`, `-pi/8`, `3pi/4` or `3*pi/4`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let bad = || CliError::Config(format!("cannot parse angle {text:?}"));
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let coef = match s[..at].trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let rest = &s[at + 2..];
    let div = if rest.is_empty() {
        1.0
    } else {
        let d = rest.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(bad());
        }
        d
    };
    Ok(coef * PI / div)
}

/// Per-group penalty weights; absent entries keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizationOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_gamma: Option<f64>,
}

impl StabilizationOverrides {
    pub fn apply(&self, base: StabilizationParams) -> StabilizationParams {
        StabilizationParams {
            k_mu: self.k_mu.unwrap_or(base.k_mu),
            k_lambda: self.k_lambda.unwrap_or(base.k_lambda),
            k_alpha: self.k_alpha.unwrap_or(base.k_alpha),
            k_beta: self.k_beta.unwrap_or(base.k_beta),
            k_gamma: self.k_gamma.unwrap_or(base.k_gamma),
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_nu() -> f64 {
    DEFAULT_NU
}
fn default_q() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The configuration file. Every field except `benchmark` has a default;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub benchmark: String,
    /// Labels such as `CG1`, `SIPG` or `SIPG-UI`.
    #[serde(default)]
    pub methods: Vec<String>,
    /// Under-integrate the β penalty of every listed DG method.
    #[serde(default)]
    pub underintegrate: bool,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub angles: Vec<AngleSpec>,
    /// Cook: grid `n = 2^level`. Beam: `(10, 2)·2^level` cells.
    #[serde(default)]
    pub levels: Vec<u32>,
    #[serde(default)]
    pub stabilization: StabilizationOverrides,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub serial: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// `solve` only: also write the vertex displacement field.
    #[serde(default)]
    pub dump_field: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

/// Command-line values that replace the corresponding config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub benchmark: Option<String>,
    pub methods: Option<Vec<String>>,
    pub p: Option<Vec<f64>>,
    pub angles: Option<Vec<String>>,
    pub nu: Option<f64>,
    pub levels: Option<Vec<u32>>,
    pub underintegrate: bool,
    pub serial: bool,
    pub output_dir: Option<PathBuf>,
    pub tol: Option<f64>,
    pub dump_field: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        // A run manifest carries the configuration that produced it.
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("manifest_version") => {
                map.remove("config").ok_or_else(|| CliError::Config("manifest has no config entry".into()))?
            }
            other => other,
        };
        let config: RunConfig = serde_json::from_value(value)?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Encode(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = &o.benchmark {
            self.benchmark = b.clone();
        }
        if let Some(m) = &o.methods {
            self.methods = m.clone();
        }
        if let Some(p) = &o.p {
            self.p = p.clone();
        }
        if let Some(a) = &o.angles {
            self.angles = a.iter().map(|s| AngleSpec::Expr(s.clone())).collect();
        }
        if let Some(nu) = o.nu {
            self.nu = nu;
        }
        if let Some(l) = &o.levels {
            self.levels = l.clone();
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(tol) = o.tol {
            self.tol = tol;
        }
        self.underintegrate |= o.underintegrate;
        self.serial |= o.serial;
        self.dump_field |= o.dump_field;
    }

    /// Checks every entry and builds the benchmark sweep.
    pub fn resolve(&self) -> Result<BenchmarkCase> {
        let benchmark = Benchmark::parse(&self.benchmark)
            .ok_or_else(|| CliError::Config(format!("unknown benchmark {:?} (expected cook or beam)", self.benchmark)))?;
        let stab = self.stabilization.apply(StabilizationParams::default());
        stab.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let mut methods = Vec::with_capacity(self.methods.len());
        for label in &self.methods {
            let mut config = parse_method(label)?;
            if self.underintegrate && config.method.is_dg() {
                config.under_integrate_beta = true;
            }
            config.stab = stab;
            if !methods.contains(&config) {
                methods.push(config);
            }
        }
        let angles = self.angles.iter().map(AngleSpec::radians).collect::<Result<Vec<_>>>()?;
        let max_level = match benchmark {
            Benchmark::Cook => MAX_COOK_LEVEL,
            Benchmark::Beam => MAX_BEAM_LEVEL,
        };
        let checks: [(bool, String); 9] = [
            (methods.is_empty(), "method list is empty".into()),
            (self.p.is_empty(), "p list is empty".into()),
            (angles.is_empty(), "angle list is empty".into()),
            (self.levels.is_empty(), "level list is empty".into()),
            (self.p.iter().any(|p| !(p.is_finite() && *p > 0.0)), "p values must be positive and finite".into()),
            (angles.iter().any(|a| !a.is_finite()), "angles must be finite".into()),
            (!(self.nu.is_finite() && self.q.is_finite() && self.q > 0.0), "nu must be finite and q positive".into()),
            (self.levels.iter().any(|&l| l > max_level), format!("levels above {max_level} are not supported for {}", benchmark.name())),
            (!(self.tol > 0.0 && self.tol < 1.0), "tol must lie in (0, 1)".into()),
        ];
        if let Some((_, message)) = checks.into_iter().find(|(failed, _)| *failed) {
            return Err(CliError::Config(message));
        }
        Ok(BenchmarkCase {
            benchmark,
            methods,
            p_values: self.p.clone(),
            angles,
            nu: self.nu,
            q: self.q,
            levels: self.levels.clone(),
            tol: self.tol,
        })
    }
}

/// `SIPG`, `sipg-ui`, `CG2`, ...
pub fn parse_method(label: &str) -> Result<MethodConfig> {
    let upper = label.trim().to_ascii_uppercase();
    let (name, ui) = match upper.strip_suffix("-UI") {
        Some(base) => (base, true),
        None => (upper.as_str(), false),
    };
    let method = Method::parse(name).ok_or_else(|| CliError::Config(format!("unknown method {label:?}")))?;
    if ui && !method.is_dg() {
        return Err(CliError::Config(format!("{label:?}: under-integration applies to DG methods only")));
    }
    Ok(MethodConfig { under_integrate_beta: ui, ..MethodConfig::new(method) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig {
            benchmark: "beam".into(),
            methods: vec!["SIPG".into()],
            p: vec![3.0],
            angles: vec![AngleSpec::Expr("pi/8".into())],
            levels: vec![0],
            ..RunConfig::default()
        }
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("3 * PI / 4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("-pi/8").unwrap(), -PI / 8.0);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("tau").is_err());
    }

    #[test]
    fn methods() {
        assert_eq!(parse_method("sipg-ui").unwrap(), MethodConfig::under_integrated(Method::Sipg));
        assert_eq!(parse_method("CG2").unwrap(), MethodConfig::new(Method::Cg2));
        assert!(matches!(parse_method("CG1-UI"), Err(CliError::Config(_))));
        assert!(matches!(parse_method("LDG"), Err(CliError::Config(_))));
    }

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!((c.schema_version, c.nu, c.q, c.tol), (1, DEFAULT_NU, 1.0, DEFAULT_TOLERANCE));
        let case = base().resolve().unwrap();
        assert_eq!(case.methods[0].stab, StabilizationParams::default());
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        assert!(RunConfig::from_json(r#"{"benchmark":"cook","mesh":3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"schema_version":2}"#).is_err());
        assert!(RunConfig::from_json(r#"{"angles":["pi/3",1.0]}"#).is_ok());
    }

    #[test]
    fn empty_grids_are_config_errors() {
        for edit in [
            |c: &mut RunConfig| c.methods.clear(),
            |c: &mut RunConfig| c.p.clear(),
            |c: &mut RunConfig| c.angles.clear(),
            |c: &mut RunConfig| c.levels.clear(),
        ] {
            let mut c = base();
            edit(&mut c);
            assert!(matches!(c.resolve(), Err(CliError::Config(_))));
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut c = base();
        c.apply(&Overrides {
            methods: Some(vec!["NIPG".into(), "IIPG".into()]),
            p: Some(vec![10.0, 100.0]),
            underintegrate: true,
            ..Overrides::default()
        });
        let case = c.resolve().unwrap();
        assert_eq!(case.methods.iter().map(|m| m.label()).collect::<Vec<_>>(), ["NIPG-UI", "IIPG-UI"]);
        assert_eq!(case.p_values, [10.0, 100.0]);
    }

    #[test]
    fn negative_penalty_is_rejected() {
        let mut c = base();
        c.stabilization.k_beta = Some(-1.0);
        let err = c.resolve().unwrap_err();
        assert!(err.to_string().contains("k_beta"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn manifest_config_is_accepted() {
        let c = base();
        let manifest = format!(r#"{{"manifest_version":1,"config":{}}}"#, c.to_json().unwrap());
        assert_eq!(RunConfig::from_json(&manifest).unwrap(), c);
    }
}
