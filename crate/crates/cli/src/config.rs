//! Scenario files: one JSON document describing candidates, the information
//! schedule and the optional blocks each subcommand reads.

use std::collections::HashSet;
use std::path::Path;

use ballotflow::{ElectionModel, InfoSchedule};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateConfig {
    pub name: String,
    pub position: f64,
    pub prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaConfig {
    Constant(f64),
    Piecewise {
        breakpoints: Vec<f64>,
        rates: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridConfig {
    /// Grid values; a range includes `stop` when it lands on the step.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridConfig::Values(v) => {
                if v.is_empty() {
                    return Err(CliError::config("sigma_grid", "grid is empty"));
                }
                Ok(v.clone())
            }
            GridConfig::Range { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0 && start.is_finite() && stop >= start) {
                    return Err(CliError::config(
                        "sigma_grid",
                        "need finite start <= stop and step > 0",
                    ));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

fn default_prior_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorGridConfig {
    #[serde(default = "default_prior_step")]
    pub step: f64,
    #[serde(default)]
    pub min_prior: f64,
    /// Rates to sweep at; defaults to the scenario's constant rate.
    #[serde(default)]
    pub sigmas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesConfig {
    pub rates: Vec<f64>,
    /// Identity when omitted.
    #[serde(default)]
    pub correlation: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub candidate: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default)]
    pub target: Option<TargetConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub candidates: Option<Vec<CandidateConfig>>,
    #[serde(default)]
    pub horizon_years: Option<f64>,
    #[serde(default)]
    pub sigma: Option<SigmaConfig>,
    #[serde(default)]
    pub sigma_grid: Option<GridConfig>,
    #[serde(default)]
    pub prior_grid: Option<PriorGridConfig>,
    /// Positions per candidate, in the order candidates are listed.
    #[serde(default)]
    pub position_variants: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub sources: Option<SourcesConfig>,
    #[serde(default)]
    pub calibration: Option<CalibrationConfig>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigParse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Candidates sorted by position together with the model they define.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let candidates = self
            .candidates
            .as_ref()
            .ok_or(CliError::MissingBlock("candidates"))?;
        let horizon = self
            .horizon_years
            .ok_or(CliError::MissingBlock("horizon_years"))?;
        let sigma = self.sigma.as_ref().ok_or(CliError::MissingBlock("sigma"))?;

        let mut seen = HashSet::new();
        for (i, c) in candidates.iter().enumerate() {
            if !seen.insert(c.name.as_str()) {
                return Err(CliError::config(
                    format!("candidates[{i}].name"),
                    format!("duplicate name `{}`", c.name),
                ));
            }
            if !c.position.is_finite() {
                return Err(CliError::config(
                    format!("candidates[{i}].position"),
                    "must be finite",
                ));
            }
            if !(c.prior.is_finite() && c.prior >= 0.0) {
                return Err(CliError::config(
                    format!("candidates[{i}].prior"),
                    "must be >= 0",
                ));
            }
        }

        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| candidates[a].position.total_cmp(&candidates[b].position));
        if let Some(w) = order
            .windows(2)
            .find(|w| candidates[w[0]].position == candidates[w[1]].position)
        {
            return Err(CliError::config(
                format!("candidates[{}].position", w[1]),
                "positions must be distinct",
            ));
        }

        let schedule = match sigma {
            SigmaConfig::Constant(s) => InfoSchedule::constant(*s),
            SigmaConfig::Piecewise { breakpoints, rates } => {
                InfoSchedule::piecewise(breakpoints.clone(), rates.clone())
            }
        }
        .map_err(|e| CliError::config("sigma", e))?;

        let model = ElectionModel::new(
            order.iter().map(|&i| candidates[i].position).collect(),
            order.iter().map(|&i| candidates[i].prior).collect(),
            horizon,
            schedule,
        )
        .map_err(|e| CliError::config("candidates", e))?;

        Ok(Scenario {
            names: order.iter().map(|&i| candidates[i].name.clone()).collect(),
            order,
            model,
        })
    }

    pub fn sigma_grid(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.sigma_grid.as_ref().map(GridConfig::values).transpose()
    }
}

/// A validated scenario with candidates in position order.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub names: Vec<String>,
    /// `order[k]` is the config index of the `k`-th candidate by position.
    pub order: Vec<usize>,
    pub model: ElectionModel,
}

impl Scenario {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Reorders a per-candidate vector given in config order.
    pub fn reorder(&self, values: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&i| values[i]).collect()
    }
}
