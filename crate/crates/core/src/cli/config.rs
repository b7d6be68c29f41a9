//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # reference conditions
//! mode = theory
//! a = 0.5
//! eta_B = 0.1
//! eta_J = 0.2
//! t_max = 50
//! ```
//!
//! Recognised keys: `mode`, `a`, `eta_B`, `eta_J`, `eta_J_list`
//! (comma-separated), `dt`, `t_max`, `record_interval`, `N`, `seed`,
//! `trials`, `test_inputs`, `output_path`, `oracle_samples`, `check_points`,
//! `compare_tol`, `abs_tol`. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::gaussmath::QuadratureSpec;
use crate::model::ModelParams;
use crate::simulator::SimConfig;
use crate::theory::TheoryConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Theory,
    Simulate,
    Compare,
    AveragesCheck,
    Sweep,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Theory,
        Mode::Simulate,
        Mode::Compare,
        Mode::AveragesCheck,
        Mode::Sweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Theory => "theory",
            Mode::Simulate => "simulate",
            Mode::Compare => "compare",
            Mode::AveragesCheck => "averages-check",
            Mode::Sweep => "sweep",
        }
    }

    fn uses_simulation(&self) -> bool {
        matches!(self, Mode::Simulate | Mode::Compare)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

pub const DEFAULT_ORACLE_SAMPLES: usize = 10_000_000;
pub const DEFAULT_COMPARE_TOL: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub params: ModelParams,
    pub sim: SimConfig,
    pub theory: TheoryConfig,
    pub eta_j_list: Vec<f64>,
    pub output_path: PathBuf,
    pub oracle_samples: usize,
    /// States checked in averages-check mode: the initial state plus
    /// `check_points - 1` records spread over a theory run to `t_max`.
    pub check_points: usize,
    /// Band on the order-parameter deviations in compare mode.
    pub compare_tol: f64,
    pub quadrature: QuadratureSpec,
}

impl ExperimentConfig {
    /// Canonical `key=value` echo used in CSV headers.
    pub fn echo(&self) -> String {
        let mut parts = vec![
            format!("mode={}", self.mode),
            format!("a={}", self.params.a),
            format!("eta_B={}", self.params.eta_b),
        ];
        match self.mode {
            Mode::Sweep => parts.push(format!(
                "eta_J_list={}",
                self.eta_j_list.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
            )),
            _ => parts.push(format!("eta_J={}", self.params.eta_j)),
        }
        parts.push(format!("t_max={}", self.theory.t_max));
        parts.push(format!("record_interval={}", self.theory.record_interval));
        match self.mode {
            Mode::Theory | Mode::Sweep => parts.push(format!("dt={}", self.theory.dt)),
            Mode::Simulate => {}
            Mode::Compare => {
                parts.push(format!("dt={}", self.theory.dt));
                parts.push(format!("compare_tol={}", self.compare_tol));
            }
            Mode::AveragesCheck => {
                parts.push(format!("dt={}", self.theory.dt));
                parts.push(format!("oracle_samples={}", self.oracle_samples));
                parts.push(format!("check_points={}", self.check_points));
            }
        }
        if self.mode.uses_simulation() {
            parts.push(format!("N={}", self.sim.n));
            parts.push(format!("trials={}", self.sim.trials));
            parts.push(format!("test_inputs={}", self.sim.test_inputs));
        }
        parts.push(format!("abs_tol={}", self.quadrature.abs_tol));
        parts.join(" ")
    }

    pub fn seed(&self) -> u64 {
        self.sim.seed
    }
}

const KEYS: [&str; 17] = [
    "mode",
    "a",
    "eta_B",
    "eta_J",
    "eta_J_list",
    "dt",
    "t_max",
    "record_interval",
    "N",
    "seed",
    "trials",
    "test_inputs",
    "output_path",
    "oracle_samples",
    "check_points",
    "compare_tol",
    "abs_tol",
];

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse::<T>().map(Some).map_err(|_| ConfigError::Parse {
                line: *line,
                msg: format!("cannot parse value '{raw}' for {key}"),
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str, mode: Mode) -> Result<T, ConfigError> {
        self.get(key)?
            .ok_or_else(|| ConfigError::Validation(format!("{key} is required in {mode} mode")))
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| ConfigError::Parse {
            line,
            msg: format!("unknown key '{key}'"),
        })?;
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                msg: format!("missing value for {key}"),
            });
        }
        if map.insert(*known, (line, value.to_string())).is_some() {
            return Err(ConfigError::Parse {
                line,
                msg: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(Entries { map })
}

/// Parses a configuration whose text names its own `mode`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parses a configuration for `mode`. A `mode` key in the text must agree
/// with it.
pub fn parse_config_for(text: &str, mode: Option<Mode>) -> Result<ExperimentConfig, ConfigError> {
    let e = tokenize(text)?;
    let text_mode: Option<String> = e.get("mode")?;
    let text_mode = match text_mode {
        None => None,
        Some(s) => {
            let line = e.map["mode"].0;
            Some(s.parse::<Mode>().map_err(|msg| ConfigError::Parse { line, msg })?)
        }
    };
    let mode = match (mode, text_mode) {
        (Some(m), Some(t)) if m != t => {
            return Err(ConfigError::Validation(format!(
                "command-line mode {m} conflicts with configured mode {t}"
            )))
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(ConfigError::Validation("mode is required".into())),
    };

    let a: f64 = e.require("a", mode)?;
    let eta_b: f64 = e.require("eta_B", mode)?;
    let eta_j_list: Vec<f64> = match e.map.get("eta_J_list") {
        None => Vec::new(),
        Some((line, raw)) => raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| ConfigError::Parse {
                    line: *line,
                    msg: format!("cannot parse '{s}' in eta_J_list"),
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let eta_j: f64 = if mode == Mode::Sweep {
        if eta_j_list.is_empty() {
            return Err(ConfigError::Validation(
                "eta_J_list must be non-empty in sweep mode".into(),
            ));
        }
        e.get("eta_J")?.unwrap_or(eta_j_list[0])
    } else {
        e.require("eta_J", mode)?
    };
    let params = ModelParams { a, eta_b, eta_j };
    params
        .validate()
        .map_err(|err| ConfigError::Validation(err.to_string()))?;
    for &eta in &eta_j_list {
        ModelParams { eta_j: eta, ..params }
            .validate()
            .map_err(|err| ConfigError::Validation(format!("eta_J_list: {err}")))?;
    }

    let t_max: f64 = match mode {
        Mode::AveragesCheck => e.get("t_max")?.unwrap_or(0.0),
        _ => e.require("t_max", mode)?,
    };
    let theory = TheoryConfig {
        dt: e.get("dt")?.unwrap_or(0.01),
        t_max,
        record_interval: e.get("record_interval")?.unwrap_or(0.5),
    };
    theory
        .record_every()
        .map_err(|err| ConfigError::Validation(err.to_string()))?;

    let sim = SimConfig {
        n: e.get("N")?.unwrap_or(SimConfig::default().n),
        seed: e.get("seed")?.unwrap_or(SimConfig::default().seed),
        t_max,
        record_interval: theory.record_interval,
        test_inputs: e.get("test_inputs")?.unwrap_or(0),
        trials: e.get("trials")?.unwrap_or(1),
    };
    if mode.uses_simulation() {
        sim.validate()
            .map_err(|err| ConfigError::Validation(err.to_string()))?;
    }

    let quadrature = QuadratureSpec {
        abs_tol: e.get("abs_tol")?.unwrap_or(QuadratureSpec::default().abs_tol),
        ..QuadratureSpec::default()
    };
    quadrature
        .validate()
        .map_err(|err| ConfigError::Validation(err.to_string()))?;

    let oracle_samples = e.get("oracle_samples")?.unwrap_or(DEFAULT_ORACLE_SAMPLES);
    if oracle_samples < crate::averages::MIN_ORACLE_SAMPLES {
        return Err(ConfigError::Validation(format!(
            "oracle_samples must be >= {}",
            crate::averages::MIN_ORACLE_SAMPLES
        )));
    }
    let check_points: usize = e.get("check_points")?.unwrap_or(1);
    if check_points == 0 {
        return Err(ConfigError::Validation("check_points must be >= 1".into()));
    }
    if check_points > 1 && !(t_max > 0.0) {
        return Err(ConfigError::Validation(
            "check_points > 1 needs t_max > 0".into(),
        ));
    }
    let compare_tol: f64 = e.get("compare_tol")?.unwrap_or(DEFAULT_COMPARE_TOL);
    if !(compare_tol > 0.0) {
        return Err(ConfigError::Validation("compare_tol must be > 0".into()));
    }

    Ok(ExperimentConfig {
        mode,
        params,
        sim,
        theory,
        eta_j_list,
        output_path: e.get::<String>("output_path")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
        oracle_samples,
        check_points,
        compare_tol,
        quadrature,
    })
}
