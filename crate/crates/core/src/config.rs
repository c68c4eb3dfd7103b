//! Flat `key = value` configuration file (TOML syntax, top-level keys only).
//!
//! Every field of [`EnvParams`], [`TrainingConfig`] and [`PlanConfig`] is a key of its
//! own, plus the goal keys of [`GoalSpec`]. Missing keys take their defaults; unknown
//! keys are rejected.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::TrainingConfig;
use crate::env::{EnvParams, EnvState};
use crate::error::{Error, Result};
use crate::planner::{Goal, PlanConfig, DEFAULT_PRECISION_FLOOR};

/// Goal given either explicitly or as a demonstration trace to imprint from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoalSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal_mean: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal_precision: Option<Vec<f64>>,
    /// CSV with `x, x_dot, theta, theta_dot` columns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal_demo: Option<PathBuf>,
    pub precision_floor: f64,
}

impl Default for GoalSpec {
    fn default() -> Self {
        Self {
            goal_mean: None,
            goal_precision: None,
            goal_demo: None,
            precision_floor: DEFAULT_PRECISION_FLOOR,
        }
    }
}

impl GoalSpec {
    /// Resolves the goal; `Ok(None)` when the config names none.
    ///
    /// A relative `goal_demo` path is taken relative to `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Option<Goal>> {
        match (&self.goal_mean, &self.goal_precision, &self.goal_demo) {
            (None, None, None) => Ok(None),
            (Some(mean), Some(precision), None) => {
                Goal::new(mean.clone(), precision.clone()).map(Some)
            }
            (None, None, Some(demo)) => {
                let path = base_dir.join(demo);
                let states = read_demo(&path)?;
                Goal::from_demo(&states, self.precision_floor).map(Some)
            }
            (_, _, Some(_)) => Err(Error::Config(
                "give either goal_demo or goal_mean/goal_precision, not both".into(),
            )),
            _ => Err(Error::Config(
                "goal_mean and goal_precision must be given together".into(),
            )),
        }
    }
}

/// Reads demonstrated states from a CSV with (at least) the four state columns.
pub fn read_demo(path: &Path) -> Result<Vec<[f64; 4]>> {
    #[derive(Deserialize)]
    struct Row {
        x: f64,
        x_dot: f64,
        theta: f64,
        theta_dot: f64,
    }
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .deserialize::<Row>()
        .map(|row| {
            let r = row?;
            Ok(EnvState::new(r.x, r.x_dot, r.theta, r.theta_dot).to_array())
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    #[serde(flatten)]
    pub env: EnvParams,
    #[serde(flatten)]
    pub training: TrainingConfig,
    #[serde(flatten)]
    pub plan: PlanConfig,
    #[serde(flatten)]
    pub goal: GoalSpec,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let known = Self::known_keys();
        if let Some(bad) = table.keys().find(|k| !known.contains(k.as_str())) {
            return Err(Error::Config(format!("unknown key `{bad}`")));
        }
        let config: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.training.validate()?;
        self.plan.sequence_count(2)?;
        if self.training.seed > i64::MAX as u64 {
            return Err(Error::Config("seed must fit in a signed 64-bit integer".into()));
        }
        Ok(())
    }

    fn known_keys() -> BTreeSet<String> {
        let mut full = Config::default();
        full.training.eval_sigma0 = Some(1.0);
        full.goal.goal_mean = Some(vec![]);
        full.goal.goal_precision = Some(vec![]);
        full.goal.goal_demo = Some(PathBuf::new());
        toml::Table::try_from(&full)
            .expect("default config serializes")
            .keys()
            .cloned()
            .collect()
    }
}
