//! Flat `key = value` config with `[section]` headers.
//!
//! ```text
//! [grid]
//! n = 128
//! [solver]
//! eps = 1e-3
//! dt = 1.5e-5
//! T = 4e-4
//! theta = 0
//! L0 = 0
//! scheme = imex
//! [experiment]
//! scenario = continuity
//! eta_list = 0.08
//! eps_list = 1e-2, 1e-3, 1e-4
//! [io]
//! outdir = out
//! ```
//!
//! `theta = 0` and `L0 = 0` mean "derive from the data" (classify θ, then
//! the L₀ formula). A config file must define every key; defaults apply
//! only when no file is given.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::initdata::Scenario;
use crate::solver::Scheme;

/// Every key a config file must define, as `section.key`.
pub const CONFIG_KEYS: &[&str] = &[
    "grid.n",
    "solver.eps",
    "solver.dt",
    "solver.T",
    "solver.theta",
    "solver.L0",
    "solver.scheme",
    "experiment.scenario",
    "experiment.eta_list",
    "experiment.eps_list",
    "io.outdir",
];

/// Optional keys with defaults.
const OPTIONAL_KEYS: &[&str] = &["solver.record_every", "experiment.seed"];

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::BadParameter(format!("config: {e}"))
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    /// zero = derive from classify.
    pub theta: f64,
    /// zero = derive from the L₀ formula.
    pub l0: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    /// Sorted descending; every η must exceed 2h.
    pub eta_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub outdir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Desk-scale defaults for a scenario (used when no config file is given).
    pub fn default_for(scenario: Scenario) -> Self {
        let n = 128usize;
        let h = 1.0 / n as f64;
        let dt = 0.25 * h * h;
        ExperimentConfig {
            scenario,
            n,
            eps: 1e-3,
            dt,
            t_end: match scenario {
                Scenario::Continuity => 20.0 * dt,
                Scenario::Jump => 0.0, // per-ε horizons are derived in the experiment
                Scenario::NonGeneric => 20.0 * dt,
                Scenario::Classical => 0.0,
            },
            theta: 0.0,
            l0: 0.0,
            scheme: Scheme::Imex,
            record_every: 1,
            eta_list: vec![0.08],
            eps_list: vec![1e-2, 1e-3, 1e-4],
            outdir: PathBuf::from("out"),
            seed: 0,
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let h = 1.0 / self.n as f64;
        let mut prev = f64::INFINITY;
        for &eta in &self.eta_list {
            if eta <= 2.0 * h {
                return Err(Error::BadParameter(format!(
                    "η = {eta} is at or below grid resolution 2h = {}",
                    2.0 * h
                )));
            }
            if eta > prev {
                return Err(Error::BadParameter("eta_list must be sorted descending".into()));
            }
            prev = eta;
        }
        if self.eta_list.is_empty() {
            return Err(Error::BadParameter("eta_list must be nonempty".into()));
        }
        if self.eps_list.is_empty() {
            return Err(Error::BadParameter("eps_list must be nonempty".into()));
        }
        Ok(())
    }
}

fn parse_sections(text: &str) -> std::result::Result<HashMap<String, String>, ConfigError> {
    let mut map = HashMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                message: format!("line {}: expected `key = value`, got `{raw}`", lineno + 1),
            });
        };
        if section.is_empty() {
            return Err(ConfigError {
                message: format!("line {}: key `{}` appears before any [section]", lineno + 1, key.trim()),
            });
        }
        let full = format!("{section}.{}", key.trim());
        if !CONFIG_KEYS.contains(&full.as_str()) && !OPTIONAL_KEYS.contains(&full.as_str()) {
            return Err(ConfigError {
                message: format!("unknown key `{full}`"),
            });
        }
        map.insert(full, value.trim().to_string());
    }
    Ok(map)
}

fn required<'m>(map: &'m HashMap<String, String>, key: &str) -> std::result::Result<&'m str, ConfigError> {
    map.get(key).map(|s| s.as_str()).ok_or_else(|| ConfigError {
        message: format!("missing key `{key}`"),
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> std::result::Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError {
        message: format!("key `{key}`: cannot parse `{raw}`"),
    })
}

fn parse_list(key: &str, raw: &str) -> std::result::Result<Vec<f64>, ConfigError> {
    raw.split(',')
        .map(|s| parse_num::<f64>(key, s.trim()))
        .collect()
}

/// Parses a config file into a full configuration. Every required key must
/// be present; the error names the first offending key.
pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    let map = parse_sections(text)?;
    for key in CONFIG_KEYS {
        if !map.contains_key(*key) {
            return Err(ConfigError {
                message: format!("missing key `{key}`"),
            });
        }
    }
    let scenario = Scenario::parse(required(&map, "experiment.scenario")?).map_err(|e| ConfigError {
        message: format!("key `experiment.scenario`: {e}"),
    })?;
    let scheme = Scheme::parse(required(&map, "solver.scheme")?).map_err(|e| ConfigError {
        message: format!("key `solver.scheme`: {e}"),
    })?;
    let cfg = ExperimentConfig {
        scenario,
        n: parse_num("grid.n", required(&map, "grid.n")?)?,
        eps: parse_num("solver.eps", required(&map, "solver.eps")?)?,
        dt: parse_num("solver.dt", required(&map, "solver.dt")?)?,
        t_end: parse_num("solver.T", required(&map, "solver.T")?)?,
        theta: parse_num("solver.theta", required(&map, "solver.theta")?)?,
        l0: parse_num("solver.L0", required(&map, "solver.L0")?)?,
        scheme,
        record_every: map
            .get("solver.record_every")
            .map(|raw| parse_num("solver.record_every", raw))
            .transpose()?
            .unwrap_or(1),
        eta_list: parse_list("experiment.eta_list", required(&map, "experiment.eta_list")?)?,
        eps_list: parse_list("experiment.eps_list", required(&map, "experiment.eps_list")?)?,
        outdir: PathBuf::from(required(&map, "io.outdir")?),
        seed: map
            .get("experiment.seed")
            .map(|raw| parse_num("experiment.seed", raw))
            .transpose()?
            .unwrap_or(0),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
[grid]
n = 64
[solver]
eps = 1e-3
dt = 1.5e-5
T = 4e-4
theta = 0
L0 = 0
scheme = imex
[experiment]
scenario = jump
eta_list = 0.08, 0.0625
eps_list = 1e-2, 1e-3
[io]
outdir = /tmp/out
";

    #[test]
    fn parses_full_config() {
        let cfg = parse_config(FULL).unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.scenario, Scenario::Jump);
        assert_eq!(cfg.eta_list, vec![0.08, 0.0625]);
        assert_eq!(cfg.eps_list, vec![1e-2, 1e-3]);
        assert_eq!(cfg.record_every, 1);
        cfg.validate().unwrap();
    }

    #[test]
    fn missing_key_is_named() {
        let text = FULL.replace("dt = 1.5e-5\n", "");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("solver.dt"), "{}", err.message);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = format!("{FULL}\n[solver]\nwarp = 9\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("solver.warp"), "{}", err.message);
    }

    #[test]
    fn eta_below_resolution_fails_validation() {
        let mut cfg = parse_config(FULL).unwrap();
        cfg.eta_list = vec![2.0 / cfg.n as f64];
        assert!(cfg.validate().is_err());
    }
}
