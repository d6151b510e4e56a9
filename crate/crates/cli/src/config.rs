//! Experiment configuration: one JSON document drives every verb.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use grandamalgam::{claim_selected, FunctionExpr, NamedFunction, SequenceData, SuiteConfig, CLAIMS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Version of the config and report layout. Written into every output.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest grid accepted on any sweep axis.
pub const MAX_AXIS_POINTS: usize = 10_000;
/// Largest ε-grid accepted by the sweep options.
pub const MAX_EPS_POINTS: usize = 100_000;
/// Largest x-grid accepted for control functions.
pub const MAX_X_POINTS: usize = 65_537;

/// Name, grid and admissibility test of one sweep axis.
type Axis<'a> = (&'static str, &'a Vec<f64>, Box<dyn Fn(f64) -> bool>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSequence {
    pub name: String,
    pub entries: SequenceData,
}

/// Grids of the `sweep` verb, one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    /// Function swept when `--fn` is not given.
    pub function: String,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub theta: Vec<f64>,
    pub a: Vec<f64>,
    pub eps: Vec<f64>,
    pub window_width: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            function: "singular".into(),
            p: vec![1.5, 2.0, 3.0, 5.0],
            q: vec![1.5, 2.0, 3.0],
            theta: vec![0.5, 1.0, 2.0],
            a: vec![0.1, 0.01, 0.001],
            eps: vec![1.0, 0.5, 0.1, 1e-2, 1e-3, 1e-4],
            window_width: vec![0.25, 0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Measure space, window, exponents, corpus and options. The `norm`,
    /// `sweep` and `export-curve` verbs read their setup from here too.
    pub suite: SuiteConfig,
    /// Extra named functions; looked up before the corpus and the probes.
    pub functions: Vec<NamedFunction>,
    pub sequences: Vec<NamedSequence>,
    pub sweep: SweepGrid,
    /// Claim filter for `verify`; `None` runs everything.
    pub claims: Option<Vec<String>>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        let lower = suite.omega.lower;
        Self {
            schema_version: SCHEMA_VERSION,
            functions: vec![NamedFunction::new("singular", FunctionExpr::power(1.0, lower, -0.5))],
            sequences: vec![NamedSequence {
                name: "harmonic".into(),
                entries: SequenceData::new((1..=64).map(|k| 1.0 / k as f64).collect())
                    .expect("nonempty finite entries"),
            }],
            suite,
            sweep: SweepGrid::default(),
            claims: None,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file; `None` gives the built-in default.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let cfg = match path {
            None => Self::default(),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
                Self::from_json(&text)?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid JSON: {e}")))?;
        if let Some(v) = value.get("schema_version") {
            if v.as_u64() != Some(SCHEMA_VERSION as u64) {
                return Err(CliError::config(format!(
                    "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                )));
            }
        }
        serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.suite.validate().map_err(|e| CliError::config(e.to_string()))?;
        let opts = &self.suite.options;
        if opts.norm.sweep.grid_points > MAX_EPS_POINTS {
            return Err(CliError::config(format!("grid_points must be ≤ {MAX_EPS_POINTS}")));
        }
        if opts.x_points_max > MAX_X_POINTS {
            return Err(CliError::config(format!("x_points_max must be ≤ {MAX_X_POINTS}")));
        }

        let mut seen = BTreeSet::new();
        for f in &self.functions {
            if !seen.insert(f.name.as_str()) {
                return Err(CliError::config(format!("function {:?} is defined twice", f.name)));
            }
            f.expr
                .validate(&self.suite.omega)
                .map_err(|e| CliError::config(format!("function {:?}: {e}", f.name)))?;
        }
        let mut seen = BTreeSet::new();
        for s in &self.sequences {
            if !seen.insert(s.name.as_str()) {
                return Err(CliError::config(format!("sequence {:?} is defined twice", s.name)));
            }
            SequenceData::new(s.entries.entries().to_vec())
                .map_err(|e| CliError::config(format!("sequence {:?}: {e}", s.name)))?;
        }

        if let Some(claims) = &self.claims {
            check_claims(claims)?;
        }
        self.function(&self.sweep.function)?;
        self.validate_sweep()
    }

    fn validate_sweep(&self) -> CliResult<()> {
        let g = &self.sweep;
        let mass = self.suite.omega.mass();
        let room = self.suite.omega.upper - self.suite.window.offset;
        let axes: [Axis<'_>; 6] = [
            ("p", &g.p, Box::new(|v| v > 1.0 && v.is_finite())),
            ("q", &g.q, Box::new(|v| v > 1.0 && v.is_finite())),
            ("theta", &g.theta, Box::new(|v| v >= 0.0 && v.is_finite())),
            ("a", &g.a, Box::new(move |v| v > 0.0 && v <= mass)),
            ("eps", &g.eps, Box::new(|v| v > 0.0 && v.is_finite())),
            ("window_width", &g.window_width, Box::new(move |v| v > 0.0 && v <= room)),
        ];
        for (name, grid, ok) in axes {
            if grid.len() > MAX_AXIS_POINTS {
                return Err(CliError::config(format!("sweep.{name} has more than {MAX_AXIS_POINTS} points")));
            }
            if let Some(v) = grid.iter().find(|&&v| !ok(v)) {
                return Err(CliError::config(format!("sweep.{name} value {v} is out of range")));
            }
        }
        Ok(())
    }

    /// Resolves a function name: `functions`, then the corpus, then the probes.
    pub fn function(&self, name: &str) -> CliResult<&FunctionExpr> {
        self.functions
            .iter()
            .chain(&self.suite.corpus)
            .chain(&self.suite.probes)
            .find(|f| f.name == name)
            .map(|f| &f.expr)
            .ok_or_else(|| CliError::config(format!("unknown function {name:?}")))
    }

    pub fn sequence(&self, name: &str) -> CliResult<&SequenceData> {
        self.sequences
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.entries)
            .ok_or_else(|| CliError::config(format!("unknown sequence {name:?}")))
    }
}

/// Rejects filter items that select no claim.
pub fn check_claims(items: &[String]) -> CliResult<()> {
    for item in items {
        if !CLAIMS.iter().any(|c| claim_selected(c, Some(std::slice::from_ref(item)))) {
            return Err(CliError::config(format!("unknown claim {item:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"schema_version": 2}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"sweeep": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"suite": {"ladderr": [1.0]}}"#).is_err());
    }

    #[test]
    fn negative_tolerance_is_a_config_error() {
        let cfg = ExperimentConfig::from_json(
            r#"{"suite": {"options": {"norm": {"quadrature": {"rel_tol": -1e-9}}}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn names_resolve_in_order() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.function("zero").unwrap(), &FunctionExpr::zero());
        assert!(cfg.function("root-singular").is_ok());
        assert!(cfg.function("nope").is_err());
        assert!(cfg.sequence("harmonic").is_ok());
        cfg.functions.push(NamedFunction::new("zero", FunctionExpr::one()));
        assert_eq!(cfg.function("zero").unwrap(), &FunctionExpr::one());
        cfg.functions.push(NamedFunction::new("zero", FunctionExpr::one()));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn claim_filters() {
        check_claims(&["T3".into(), "T10.acn".into()]).unwrap();
        assert!(check_claims(&["T99".into()]).is_err());
        let cfg = ExperimentConfig { claims: Some(vec!["P9".into()]), ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_grids_are_range_checked() {
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.p = vec![1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.window_width = vec![2.0];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.function = "missing".into();
        assert!(cfg.validate().is_err());
    }
}
