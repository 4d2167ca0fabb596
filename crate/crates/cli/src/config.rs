//! Line-based run configuration: `key = value`, `#` comments.

use std::path::PathBuf;

use hammerstein_core::catalog::{ProblemParams, WeightChoice};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing `problem` key")]
    MissingProblem,
    #[error("`{key}` {reason}")]
    Invalid { key: &'static str, reason: String },
}

pub const KEYS: [&str; 16] = [
    "problem",
    "weight",
    "amplitude",
    "decay_rate",
    "window",
    "cone_coefficient",
    "map_scale",
    "n_nodes",
    "nodes_per_A_interval",
    "tol_spectral",
    "tol_solve",
    "max_iter",
    "damping",
    "seed",
    "initial_amplitude",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub problem: ProblemParams,
    pub n_nodes: usize,
    #[serde(rename = "nodes_per_A_interval")]
    pub nodes_per_a_interval: usize,
    pub tol_spectral: f64,
    pub tol_solve: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub seed: u64,
    /// φ-norm of the starting iterate of `solve`.
    pub initial_amplitude: f64,
    /// Left out of reports so that they do not depend on where they land.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl RunSpec {
    pub fn new(problem: ProblemParams) -> Self {
        Self {
            problem,
            n_nodes: 400,
            nodes_per_a_interval: 64,
            tol_spectral: 1e-10,
            tol_solve: 1e-8,
            max_iter: 10_000,
            damping: 1.0,
            seed: 42,
            initial_amplitude: 1.0,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, reason: &str| Err(ConfigError::Invalid { key, reason: reason.into() });
        if self.n_nodes < 8 {
            return invalid("n_nodes", "must be at least 8");
        }
        if self.nodes_per_a_interval < 8 {
            return invalid("nodes_per_A_interval", "must be at least 8");
        }
        if !(self.tol_spectral > 0.0) {
            return invalid("tol_spectral", "must be positive");
        }
        if !(self.tol_solve > 0.0) {
            return invalid("tol_solve", "must be positive");
        }
        if self.max_iter == 0 {
            return invalid("max_iter", "must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return invalid("damping", "must lie in (0, 1]");
        }
        if !(self.initial_amplitude >= 0.0 && self.initial_amplitude.is_finite()) {
            return invalid("initial_amplitude", "must be finite and nonnegative");
        }
        Ok(())
    }

    /// Config text that parses back to `self`.
    pub fn to_config(&self) -> String {
        let mut out = self.problem.to_config();
        let defaults = Self::new(self.problem.clone());
        let mut put = |key: &str, v: String, d: String| {
            if v != d {
                out += &format!("{key} = {v}\n");
            }
        };
        put("n_nodes", self.n_nodes.to_string(), defaults.n_nodes.to_string());
        put(
            "nodes_per_A_interval",
            self.nodes_per_a_interval.to_string(),
            defaults.nodes_per_a_interval.to_string(),
        );
        put("tol_spectral", format!("{:?}", self.tol_spectral), format!("{:?}", defaults.tol_spectral));
        put("tol_solve", format!("{:?}", self.tol_solve), format!("{:?}", defaults.tol_solve));
        put("max_iter", self.max_iter.to_string(), defaults.max_iter.to_string());
        put("damping", format!("{:?}", self.damping), format!("{:?}", defaults.damping));
        put("seed", self.seed.to_string(), defaults.seed.to_string());
        put(
            "initial_amplitude",
            format!("{:?}", self.initial_amplitude),
            format!("{:?}", defaults.initial_amplitude),
        );
        if let Some(dir) = &self.output_dir {
            out += &format!("output_dir = {}\n", dir.display());
        }
        out
    }
}

fn bad(line: usize, key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        line,
        key: key.into(),
        value: value.into(),
        reason: reason.to_string(),
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(line, key, value, e))
}

pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                text: content.into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Malformed {
                line,
                text: content.into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if pairs.iter().any(|(_, k, _)| *k == key) {
            return Err(ConfigError::Duplicate { line, key: key.into() });
        }
        pairs.push((line, key, value));
    }

    let (_, _, id) = pairs
        .iter()
        .find(|(_, k, _)| *k == "problem")
        .ok_or(ConfigError::MissingProblem)?;
    let mut spec = RunSpec::new(ProblemParams::new(*id));

    for &(line, key, value) in &pairs {
        match key {
            "problem" => {}
            "weight" => {
                spec.problem.weight = Some(WeightChoice::parse(value).map_err(|e| bad(line, key, value, e))?);
            }
            "amplitude" => spec.problem.amplitude = Some(number(line, key, value)?),
            "decay_rate" => spec.problem.decay_rate = Some(number(line, key, value)?),
            "cone_coefficient" => spec.problem.cone_coefficient = Some(number(line, key, value)?),
            "map_scale" => spec.problem.map_scale = Some(number(line, key, value)?),
            "window" => {
                let Some((a, b)) = value.split_once(',') else {
                    return Err(bad(line, key, value, "expected `a, b`"));
                };
                let a: f64 = number(line, key, a.trim())?;
                let b: f64 = number(line, key, b.trim())?;
                spec.problem.window = Some((a, b));
            }
            "n_nodes" => spec.n_nodes = number(line, key, value)?,
            "nodes_per_A_interval" => spec.nodes_per_a_interval = number(line, key, value)?,
            "tol_spectral" => spec.tol_spectral = number(line, key, value)?,
            "tol_solve" => spec.tol_solve = number(line, key, value)?,
            "max_iter" => spec.max_iter = number(line, key, value)?,
            "damping" => spec.damping = number(line, key, value)?,
            "seed" => spec.seed = number(line, key, value)?,
            "initial_amplitude" => spec.initial_amplitude = number(line, key, value)?,
            "output_dir" => spec.output_dir = Some(PathBuf::from(value)),
            _ => unreachable!("key list and match arms agree"),
        }
    }
    spec.validate()?;
    Ok(spec)
}
