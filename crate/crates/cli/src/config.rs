//! Experiment configuration: TOML file, then flag overrides, then
//! validation through serde with unknown keys rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use toml::{Table, Value};
use ultralab_core::{EvolutionMode, LevelChain, PotentialSpec};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Level of single-level commands.
    pub level: i32,
    /// Level range of `refine`, written `"4..9"` (inclusive).
    pub levels: LevelRange,
    pub domain: [f64; 2],
    pub pad: f64,
    /// Consistency order of the derivative, 2 or 4.
    pub p: usize,
    /// Bandwidth of the derivative.
    pub w: usize,
    /// Observable of `spectrum` and `measure`.
    pub observable: ObservableKind,
    pub mode: EvolutionMode,
    pub times: Vec<f64>,
    /// Eigenvector indices written by `spectrum`.
    pub eigenvectors: Vec<usize>,
    /// Net scanned by `refine`.
    pub quantity: Quantity,
    pub out: PathBuf,
    pub potential: PotentialConfig,
    pub state: StateConfig,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            level: 6,
            levels: LevelRange { min: 4, max: 9 },
            domain: [0.0, 1.0],
            pad: 0.25,
            p: 2,
            w: 1,
            observable: ObservableKind::Hamiltonian,
            mode: EvolutionMode::Heat,
            times: vec![0.0, 0.05, 0.1, 0.2],
            eigenvectors: Vec::new(),
            quantity: Quantity::Poincare,
            out: PathBuf::from("out"),
            potential: PotentialConfig::Zero,
            state: StateConfig::Gaussian { center: 0.5, sigma: 0.1 },
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative gap below which eigenvalues share a standard part.
    pub st: f64,
    pub residual: f64,
    pub orthonormality: f64,
    /// Axiom 2 integral threshold.
    pub integral: f64,
    /// Multiplier on the Taylor bound of the consistency check.
    pub consistency_safety: f64,
    /// Lower bound for `sigma_min·h`.
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            st: 1e-6,
            residual: 1e-9,
            orthonormality: 1e-10,
            integral: 1e-4,
            consistency_safety: 1.5,
            kernel: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelRange {
    pub min: i32,
    pub max: i32,
}

impl LevelRange {
    pub fn chain(&self) -> Result<LevelChain, CliError> {
        Ok(LevelChain::new(self.min, self.max)?)
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

impl FromStr for LevelRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("level range `{s}` must look like `4..9`"))?;
        let parse = |t: &str| t.trim().parse::<i32>().map_err(|e| format!("level range `{s}`: {e}"));
        let (min, max) = (parse(a)?, parse(b)?);
        if min > max {
            return Err(format!("level range `{s}` is empty"));
        }
        Ok(LevelRange { min, max })
    }
}

impl Serialize for LevelRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LevelRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Position,
    Momentum,
    Hamiltonian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `‖Dδ_a‖/‖δ_a‖` at the node nearest the domain center.
    Poincare,
    /// Worst consistency error of the bump battery.
    Consistency,
    /// `⟨Hψ, ψ⟩` of the configured state and potential.
    Energy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Harmonic { omega: f64 },
    DeltaBump { strength: f64, at: f64 },
    IndicatorPenalty { lo: f64, hi: f64 },
    DirichletBox { lo: f64, hi: f64 },
    /// Vanishing-diffusion Hamiltonian `−½·D·χ_Ω·D`.
    Neumann { lo: f64, hi: f64 },
}

impl PotentialConfig {
    /// The potential term, or `None` for the Neumann form which replaces
    /// the kinetic term instead.
    pub fn spec(&self) -> Option<PotentialSpec> {
        Some(match *self {
            PotentialConfig::Zero => PotentialSpec::Zero,
            PotentialConfig::Harmonic { omega } => PotentialSpec::harmonic(omega),
            PotentialConfig::DeltaBump { strength, at } => PotentialSpec::DeltaBump { strength, at },
            PotentialConfig::IndicatorPenalty { lo, hi } => PotentialSpec::IndicatorPenalty { lo, hi },
            PotentialConfig::DirichletBox { lo, hi } => PotentialSpec::DirichletBox { lo, hi },
            PotentialConfig::Neumann { .. } => return None,
        })
    }

    /// Points that must be grid nodes.
    pub fn required_points(&self) -> Vec<f64> {
        match *self {
            PotentialConfig::Zero | PotentialConfig::Harmonic { .. } => vec![],
            PotentialConfig::DeltaBump { at, .. } => vec![at],
            PotentialConfig::IndicatorPenalty { lo, hi }
            | PotentialConfig::DirichletBox { lo, hi }
            | PotentialConfig::Neumann { lo, hi } => vec![lo, hi],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Gaussian { center: f64, sigma: f64 },
    /// Normalized delta at a node.
    Delta { at: f64 },
    /// Normalized `sin(nπ(x − lo)/(hi − lo))` on `[lo, hi]`.
    Sine { n: u32, lo: f64, hi: f64 },
    /// Normalized `|x − c|^(−1/4)` bump.
    SingularBump { center: f64, radius: f64 },
    /// Eigenvector `index` of the configured observable.
    Eigenvector { index: usize },
}

impl StateConfig {
    pub fn required_points(&self) -> Vec<f64> {
        match *self {
            StateConfig::Delta { at } => vec![at],
            StateConfig::SingularBump { center, .. } => vec![center],
            _ => vec![],
        }
    }
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub level: Option<i32>,
    pub levels: Option<String>,
    pub domain: Option<[f64; 2]>,
    pub pad: Option<f64>,
    pub p: Option<usize>,
    pub w: Option<usize>,
    pub out: Option<PathBuf>,
    /// Generic `key.path=value` assignments; values are TOML literals or
    /// bare strings.
    pub set: Vec<String>,
}

impl Overrides {
    fn apply(&self, table: &mut Table) -> Result<(), CliError> {
        let mut put = |key: &str, v: Value| {
            table.insert(key.to_string(), v);
        };
        if let Some(v) = self.level {
            put("level", Value::Integer(v as i64));
        }
        if let Some(v) = &self.levels {
            put("levels", Value::String(v.clone()));
        }
        if let Some([a, b]) = self.domain {
            put("domain", Value::Array(vec![Value::Float(a), Value::Float(b)]));
        }
        if let Some(v) = self.pad {
            put("pad", Value::Float(v));
        }
        if let Some(v) = self.p {
            put("p", Value::Integer(v as i64));
        }
        if let Some(v) = self.w {
            put("w", Value::Integer(v as i64));
        }
        if let Some(v) = &self.out {
            put("out", Value::String(v.to_string_lossy().into_owned()));
        }
        for assignment in &self.set {
            let (path, raw) = assignment
                .split_once('=')
                .ok_or_else(|| CliError::validation(format!("--set `{assignment}` must look like key=value")))?;
            set_path(table, path.trim(), parse_value(raw.trim()))?;
        }
        Ok(())
    }
}

fn parse_value(raw: &str) -> Value {
    match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut Table, path: &str, value: Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| CliError::validation(format!("empty key in `{path}`")))?;
    if let Some(&top) = parts.first() {
        if !table.contains_key(top) {
            // Dotted edits into an omitted table start from its default value.
            let defaults = Value::try_from(ExperimentConfig::default()).expect("defaults serialize");
            if let Some(seed) = defaults.get(top).filter(|v| v.is_table()) {
                table.insert(top.to_string(), seed.clone());
            }
        }
    }
    let mut current = table;
    for part in parts {
        let entry = current.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        current = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::validation(format!("key `{part}` is not a table"))),
        };
    }
    if last == "kind" && current.get("kind").is_some_and(|k| *k != value) {
        // Switching variant drops the previous variant's fields.
        current.clear();
    }
    current.insert(last.to_string(), value);
    Ok(())
}

/// Parses `text` as a config file, applies `overrides`, and validates.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut table: Table = toml::from_str(text).map_err(|e| CliError::validation(format!("config: {}", e.message())))?;
    overrides.apply(&mut table)?;
    let config: ExperimentConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::validation(format!("config: {}", e.message())))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), CliError> {
        let [a, b] = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(CliError::validation(format!("domain: [{a}, {b}] is not an interval")));
        }
        if !(self.pad.is_finite() && self.pad >= 0.0) {
            return Err(CliError::validation(format!("pad: {} must be non-negative", self.pad)));
        }
        if !matches!(self.p, 2 | 4) {
            return Err(CliError::validation(format!("p: {} must be 2 or 4", self.p)));
        }
        if !(0..=30).contains(&self.level) {
            return Err(CliError::validation(format!("level: {} must lie in 0..=30", self.level)));
        }
        Ok(())
    }

    /// Canonical TOML rendering; parsing it yields the same config.
    pub fn dump(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn required_points(&self) -> Vec<f64> {
        let mut pts = self.potential.required_points();
        pts.extend(self.state.required_points());
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_set_edits_the_default_table() {
        let overrides = Overrides { set: vec!["state.sigma=0.2".into(), "tolerances.st=1e-5".into()], ..Default::default() };
        let c = parse_config("", &overrides).unwrap();
        assert_eq!(c.state, StateConfig::Gaussian { center: 0.5, sigma: 0.2 });
        assert_eq!(c.tolerances.st, 1e-5);
        assert_eq!(c.tolerances.residual, Tolerances::default().residual);
        let file = "[state]\nkind = \"delta\"\nat = 0.25\n";
        let overrides = Overrides { set: vec!["state.at=0.5".into()], ..Default::default() };
        assert_eq!(parse_config(file, &overrides).unwrap().state, StateConfig::Delta { at: 0.5 });
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("", &Overrides::default()).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let overrides = Overrides { level: Some(6), p: Some(4), ..Default::default() };
        let c = parse_config("p = 2\nlevel = 3\n", &overrides).unwrap();
        assert_eq!((c.level, c.p), (6, 4));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config("foo = 1\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
        let err = parse_config("[potential]\nkind = \"harmonic\"\nomega = 1.0\nbar = 2\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("bar"), "{err}");
        let err = parse_config("[tolerances]\nbaz = 1.0\n", &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("baz"), "{err}");
    }

    #[test]
    fn dump_round_trips() {
        let overrides = Overrides {
            set: vec![
                "potential.kind=dirichlet_box".into(),
                "potential.lo=0.0".into(),
                "potential.hi=1.0".into(),
                "state.kind=sine".into(),
                "state.n=2".into(),
                "state.lo=0.0".into(),
                "state.hi=1.0".into(),
                "mode=schrodinger".into(),
            ],
            levels: Some("5..8".into()),
            ..Default::default()
        };
        let c = parse_config("", &overrides).unwrap();
        let text = c.dump();
        let back = parse_config(&text, &Overrides::default()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.dump(), text);
    }

    #[test]
    fn set_replaces_tagged_tables() {
        let overrides = Overrides { set: vec!["state={kind=\"delta\", at=0.5}".into()], ..Default::default() };
        let c = parse_config("", &overrides).unwrap();
        assert_eq!(c.state, StateConfig::Delta { at: 0.5 });
    }

    #[test]
    fn malformed_values_are_rejected() {
        assert!(parse_config("p = 3\n", &Overrides::default()).is_err());
        assert!(parse_config("levels = \"9..4\"\n", &Overrides::default()).is_err());
        assert!(parse_config("domain = [1.0, 0.0]\n", &Overrides::default()).is_err());
        assert!(parse_config("level = \"six\"\n", &Overrides::default()).is_err());
    }
}
