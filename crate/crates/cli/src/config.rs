//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use grouprep_core::generate::SyntheticSpec;
use grouprep_core::{CostKind, Fairness, Method};
use serde::{Deserialize, Serialize};

use crate::error::{validation, CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DataSource {
    /// Two Gaussian groups, regenerated for every repetition.
    Synthetic {
        #[serde(default)]
        spec: SyntheticSpec,
    },
    Csv {
        path: PathBuf,
        group_column: String,
        feature_columns: Vec<String>,
    },
}

/// Number of points drawn, without replacement, from one group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub group: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacilitySweep {
    /// Uniform opening cost at each grid point.
    pub opening_costs: Vec<f64>,
    /// Candidate locations proposed by farthest-first traversal.
    pub locations: usize,
    #[serde(default)]
    pub capacity: Option<usize>,
    /// Defaults to 0.75 uncapacitated and 0.1 capacitated.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "both_fairness")]
    pub fairness: Vec<Fairness>,
}

fn default_delta() -> f64 {
    0.1
}

fn both_fairness() -> Vec<Fairness> {
    vec![Fairness::PerGroup, Fairness::Aggregate]
}

fn default_k() -> usize {
    3
}

fn default_methods() -> Vec<Method> {
    vec![Method::Standard, Method::LsFair, Method::LpFairDependent]
}

fn default_epsilon() -> f64 {
    0.5
}

fn default_draws() -> usize {
    10
}

fn default_repetitions() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: DataSource,
    #[serde(default = "default_k")]
    pub k: usize,
    /// `abs` or `rel`.
    #[serde(default)]
    pub objective: CostKind,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub candidates: Option<usize>,
    /// Per-group subsample sizes; the whole dataset when empty.
    #[serde(default)]
    pub sample: Vec<GroupSample>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub facility: Option<FacilitySweep>,
    /// Record wall-clock time per cell. Off by default so reports are
    /// byte-for-byte reproducible.
    #[serde(default)]
    pub timings: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| validation(format!("bad experiment config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(validation("repetitions must be at least 1"));
        }
        if self.k == 0 {
            return Err(validation("k must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(validation("at least one method is needed"));
        }
        if !matches!(self.objective, CostKind::Abs | CostKind::Rel) {
            return Err(validation("objective must be abs or rel"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(validation(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.draws == 0 {
            return Err(validation("draws must be at least 1"));
        }
        if let Some(f) = &self.facility {
            if f.opening_costs.is_empty() {
                return Err(validation("facility sweep needs at least one opening cost"));
            }
            if f.opening_costs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
                return Err(validation("opening costs must be finite and non-negative"));
            }
            if f.locations == 0 {
                return Err(validation("facility sweep needs at least one location"));
            }
            if f.fairness.is_empty() {
                return Err(validation("facility sweep needs at least one fairness mode"));
            }
        }
        Ok(())
    }
}
