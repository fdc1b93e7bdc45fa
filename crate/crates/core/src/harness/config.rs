//! Experiment configuration.
//!
//! Configs are flat TOML documents: one `key = value` per line, `#` comments,
//! strings in double quotes, lists in brackets. Unknown keys are rejected.
//!
//! ```toml
//! name = "acceptance"
//! distribution = "uniform_centered"   # rademacher | uniform_centered | normal | exponential_centered
//! sigma = 1.0                         # optional, default 1
//! n_list = [10000]
//! grid_size = 100                     # >= 10
//! schedule = "power_law"              # none | fixed_k | power_law
//! r = 0.5                             # power_law only
//! # k = 100                           # fixed_k only
//! selection = "random_per_time"       # prefix | suffix | random_per_time | static_random
//! replications = 10000                # >= 1000
//! seed = 20240601
//! suites = ["donsker_complete", "donsker_deleted"]
//!
//! # Optional knobs (defaults shown)
//! empirical_distribution = "uniform01"
//! bridge_points = 512
//! ks_factor = 1.63
//! sup_ks_factor = 2.5
//! bridge_ks_factor = 2.5
//! discretization_coef = 0.8
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::deletion::{DeletionSchedule, Selection};
use crate::error::{Error, Result};
use crate::sampling::{DistributionKind, DistributionSpec};

pub const MIN_REPLICATIONS: usize = 1000;
pub const MIN_GRID_SIZE: usize = 10;

/// Named groups of checks run for every `n` in `n_list`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    DonskerComplete,
    DonskerDeleted,
    Polygonal,
    EmpiricalBridge,
    SequentialKm,
    Lemma2Structure,
    NegligibilityViolation,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::DonskerComplete,
        Suite::DonskerDeleted,
        Suite::Polygonal,
        Suite::EmpiricalBridge,
        Suite::SequentialKm,
        Suite::Lemma2Structure,
        Suite::NegligibilityViolation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::DonskerComplete => "donsker_complete",
            Suite::DonskerDeleted => "donsker_deleted",
            Suite::Polygonal => "polygonal",
            Suite::EmpiricalBridge => "empirical_bridge",
            Suite::SequentialKm => "sequential_km",
            Suite::Lemma2Structure => "lemma2_structure",
            Suite::NegligibilityViolation => "negligibility_violation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    distribution: String,
    sigma: Option<f64>,
    n_list: Vec<usize>,
    grid_size: usize,
    schedule: String,
    k: Option<usize>,
    r: Option<f64>,
    selection: String,
    replications: usize,
    seed: u64,
    suites: Vec<String>,
    empirical_distribution: Option<String>,
    bridge_points: Option<usize>,
    ks_factor: Option<f64>,
    sup_ks_factor: Option<f64>,
    bridge_ks_factor: Option<f64>,
    discretization_coef: Option<f64>,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub distribution: DistributionSpec,
    pub n_list: Vec<usize>,
    pub grid_size: usize,
    pub schedule: DeletionSchedule,
    pub selection: Selection,
    pub replications: usize,
    pub seed: u64,
    pub suites: Vec<Suite>,
    /// Law sampled by the empirical and sequential suites; must be continuous.
    pub empirical_distribution: DistributionSpec,
    /// Number of x-points for the bridge supremum.
    pub bridge_points: usize,
    /// KS threshold factor (threshold = factor / √M) for marginal laws.
    pub ks_factor: f64,
    /// KS factor for grid-supremum laws of Brownian motion.
    pub sup_ks_factor: f64,
    /// KS factor for the bridge supremum (Kolmogorov law).
    pub bridge_ks_factor: f64,
    /// Supremum allowance is `discretization_coef / √resolution`.
    pub discretization_coef: f64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("config: {}", e.message())))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let kind: DistributionKind = raw.distribution.parse()?;
        let distribution = match raw.sigma {
            Some(s) => DistributionSpec::new(kind, s)?,
            None => DistributionSpec::standard(kind),
        };
        let schedule = match raw.schedule.as_str() {
            "none" => {
                reject_key(raw.k.is_some(), "k", "none")?;
                reject_key(raw.r.is_some(), "r", "none")?;
                DeletionSchedule::None
            }
            "fixed_k" => {
                reject_key(raw.r.is_some(), "r", "fixed_k")?;
                let k = raw.k.ok_or_else(|| Error::config("fixed_k schedule needs `k`"))?;
                DeletionSchedule::FixedK { k }
            }
            "power_law" => {
                reject_key(raw.k.is_some(), "k", "power_law")?;
                let r = raw.r.ok_or_else(|| Error::config("power_law schedule needs `r`"))?;
                DeletionSchedule::power_law(r)?
            }
            other => return Err(Error::config(format!("unknown schedule `{other}`"))),
        };
        let empirical_distribution = match raw.empirical_distribution {
            Some(name) => DistributionSpec::standard(name.parse()?),
            None => DistributionSpec::uniform01(),
        };
        let suites = raw.suites.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>>>()?;
        let config = ExperimentConfig {
            name: raw.name,
            distribution,
            n_list: raw.n_list,
            grid_size: raw.grid_size,
            schedule,
            selection: raw.selection.parse()?,
            replications: raw.replications,
            seed: raw.seed,
            suites,
            empirical_distribution,
            bridge_points: raw.bridge_points.unwrap_or(512),
            ks_factor: raw.ks_factor.unwrap_or(1.63),
            sup_ks_factor: raw.sup_ks_factor.unwrap_or(2.5),
            bridge_ks_factor: raw.bridge_ks_factor.unwrap_or(2.5),
            discretization_coef: raw.discretization_coef.unwrap_or(0.8),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::config("n_list must not be empty"));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 2) {
            return Err(Error::config(format!("n must be at least 2, got {n}")));
        }
        if self.suites.is_empty() {
            return Err(Error::config("suites must not be empty"));
        }
        let mut seen = self.suites.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("suites must not repeat"));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::config(format!(
                "replications must be at least {MIN_REPLICATIONS}, got {}",
                self.replications
            )));
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(Error::config(format!(
                "grid_size must be at least {MIN_GRID_SIZE}, got {}",
                self.grid_size
            )));
        }
        if !self.distribution.is_centered() {
            return Err(Error::config("partial-sum suites need a centered distribution"));
        }
        if !self.empirical_distribution.is_continuous() {
            return Err(Error::config("empirical_distribution must be continuous"));
        }
        if self.bridge_points == 0 {
            return Err(Error::config("bridge_points must be positive"));
        }
        for (key, v) in [
            ("ks_factor", self.ks_factor),
            ("sup_ks_factor", self.sup_ks_factor),
            ("bridge_ks_factor", self.bridge_ks_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{key} must be positive")));
            }
        }
        if !(self.discretization_coef.is_finite() && self.discretization_coef >= 0.0) {
            return Err(Error::config("discretization_coef must be non-negative"));
        }
        self.schedule.validate()
    }
}

fn reject_key(present: bool, key: &str, schedule: &str) -> Result<()> {
    if present {
        Err(Error::config(format!("key `{key}` is not used by schedule `{schedule}`")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
distribution = "normal"
n_list = [100]
grid_size = 10
schedule = "fixed_k"
k = 3
selection = "prefix"
replications = 1000
seed = 1
suites = ["donsker_complete"]
"#;

    #[test]
    fn parses_minimal() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.schedule, DeletionSchedule::FixedK { k: 3 });
        assert_eq!(c.bridge_points, 512);
        assert_eq!(c.distribution.sigma(), 1.0);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{BASE}\nreplicatoins = 5\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_suite_rejected() {
        let text = BASE.replace("\"donsker_complete\"", "\"donsker_completely\"");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn empty_n_list_rejected() {
        let text = BASE.replace("[100]", "[]");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn invariants_enforced() {
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("= 1000", "= 999")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("grid_size = 10", "grid_size = 9")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("k = 3", "r = 0.5")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("\"normal\"", "\"uniform01\"")).is_err());
        let text = format!("{BASE}\nempirical_distribution = \"rademacher\"\n");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }
}
