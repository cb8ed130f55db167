//! Run configuration: a TOML file bundling the scenario, power model,
//! constraint set, and solver/simulation controls. Every section and field
//! is optional and falls back to the reference defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::McConfig;
use crate::moop::{Constraints, DqnConfig, Evaluator, Nsga2Config, R_MIN_DEFAULT};
use crate::power::PowerParams;
use crate::quantizer::B_MAX_DEFAULT;
use crate::scenario::SystemConfig;

/// Power-bound specification: a fixed value in watts, `"reference"` to
/// anchor it at the scheme's uniform reference allocation, or `"none"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerCapSpec {
    Fixed(f64),
    Mode(String),
}

impl Default for PowerCapSpec {
    fn default() -> Self {
        PowerCapSpec::Mode("reference".into())
    }
}

/// Constraint section as written in the file; `b_budget` defaults to the
/// full-resolution budget of the configured scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintSpec {
    pub b_budget: Option<u32>,
    pub r_ul_min: f64,
    pub r_dl_min: f64,
    pub power_cap: PowerCapSpec,
    pub power_cap_is_floor: bool,
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        Self {
            b_budget: None,
            r_ul_min: R_MIN_DEFAULT,
            r_dl_min: R_MIN_DEFAULT,
            power_cap: PowerCapSpec::default(),
            power_cap_is_floor: false,
        }
    }
}

impl ConstraintSpec {
    /// Resolves the section against a concrete evaluator (needed when the
    /// power bound is anchored at the reference allocation).
    pub fn resolve(&self, evaluator: &Evaluator) -> Result<Constraints> {
        let p_cap = match &self.power_cap {
            PowerCapSpec::Fixed(w) => {
                if !(*w > 0.0) {
                    return Err(Error::Config("power_cap must be positive".into()));
                }
                Some(*w)
            }
            PowerCapSpec::Mode(mode) => match mode.as_str() {
                "none" => None,
                "reference" => evaluator.default_constraints()?.p_cap,
                other => {
                    return Err(Error::Config(format!(
                        "power_cap must be a number, \"reference\", or \"none\", got {other:?}"
                    )))
                }
            },
        };
        if !(self.r_ul_min > 0.0 && self.r_dl_min > 0.0) {
            return Err(Error::Config("rate floors must be positive".into()));
        }
        Ok(Constraints {
            b_budget: self
                .b_budget
                .unwrap_or_else(|| Constraints::full_budget(evaluator.cfg, B_MAX_DEFAULT)),
            r_ul_min: self.r_ul_min,
            r_dl_min: self.r_dl_min,
            p_cap,
            p_cap_is_floor: self.power_cap_is_floor,
        })
    }
}

/// Whole-run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub power: PowerParams,
    pub constraints: ConstraintSpec,
    pub nsga2: Nsga2Config,
    pub dqn: DqnConfig,
    pub montecarlo: McConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.system.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(format!("config: {e}")))
    }
}
