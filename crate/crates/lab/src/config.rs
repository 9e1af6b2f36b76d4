//! Experiment configuration: a JSON file and command-line flags merged into a
//! [`Run`] with every default resolved from the catalog.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{self, Entry, Range, Threshold};
use crate::error::{LabError, LabResult};

/// User-facing configuration. Every field is optional here so that a file and
/// flags can be layered; [`ExperimentConfig::resolve`] enforces what is required.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub n: Option<f64>,
    #[serde(default)]
    pub trajectories: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| LabError::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// `other` wins wherever it sets a value.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        self.experiment = other.experiment.or(self.experiment);
        self.seed = other.seed.or(self.seed);
        self.model = other.model.or(self.model);
        self.n = other.n.or(self.n);
        self.trajectories = other.trajectories.or(self.trajectories);
        self.out = other.out.or(self.out);
        self.params.extend(other.params);
        self.thresholds.extend(other.thresholds);
        self
    }

    pub fn resolve(&self) -> LabResult<Run> {
        let id = self.experiment.as_deref().ok_or_else(|| LabError::config("no experiment named"))?;
        let entry = catalog::find(id).ok_or_else(|| LabError::config(format!("unknown experiment `{id}`")))?;
        let seed = self.seed.ok_or_else(|| LabError::config("a seed is required"))?;
        let model = self.model.clone().unwrap_or_else(|| entry.models[0].to_string());
        if !entry.models.contains(&model.as_str()) {
            return Err(LabError::config(format!("model `{model}` is not one of {:?}", entry.models)));
        }
        let n = resolve_count("n", self.n, entry.n.as_ref())?;
        let trajectories = resolve_count("trajectories", self.trajectories, entry.trajectories.as_ref())?.map(|t| t as usize);
        let mut params = BTreeMap::new();
        for p in entry.params {
            params.insert(p.name.to_string(), p.default);
        }
        for (k, v) in &self.params {
            let p = entry.params.iter().find(|p| p.name == k).ok_or_else(|| LabError::config(format!("unknown parameter `{k}`")))?;
            if !(v.is_finite() && *v >= p.min && *v <= p.max) {
                return Err(LabError::config(format!("parameter `{k}` = {v} outside [{}, {}]", p.min, p.max)));
            }
            params.insert(k.clone(), *v);
        }
        let active: Vec<&Threshold> = entry.thresholds_for(&model).collect();
        let mut thresholds = BTreeMap::new();
        for t in &active {
            thresholds.insert(t.key.to_string(), t.default);
        }
        for (k, v) in &self.thresholds {
            if !active.iter().any(|t| t.key == k) {
                return Err(LabError::config(format!("unknown threshold `{k}` for model `{model}`")));
            }
            if !v.is_finite() {
                return Err(LabError::config(format!("threshold `{k}` must be finite")));
            }
            thresholds.insert(k.clone(), *v);
        }
        Ok(Run { entry, seed, model, n, trajectories, params, thresholds, out: self.out.clone() })
    }
}

fn resolve_count(name: &str, given: Option<f64>, range: Option<&Range>) -> LabResult<Option<u64>> {
    match (given, range) {
        (None, None) => Ok(None),
        (Some(_), None) => Err(LabError::config(format!("`{name}` does not apply to this experiment"))),
        (None, Some(r)) => Ok(Some(r.default as u64)),
        (Some(v), Some(r)) => {
            if !(v.is_finite() && v.fract() == 0.0) {
                return Err(LabError::config(format!("`{name}` must be a whole number, got {v}")));
            }
            if v < r.min || v > r.max {
                return Err(LabError::config(format!("`{name}` = {v} outside [{}, {}]", r.min, r.max)));
            }
            Ok(Some(v as u64))
        }
    }
}

/// A validated configuration with defaults filled in.
#[derive(Clone, Debug)]
pub struct Run {
    pub entry: &'static Entry,
    pub seed: u64,
    pub model: String,
    pub n: Option<u64>,
    pub trajectories: Option<usize>,
    pub params: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
}

impl Run {
    /// Panics on a name the catalog entry does not declare.
    pub fn param(&self, name: &str) -> f64 {
        *self.params.get(name).unwrap_or_else(|| panic!("`{}` declares no parameter `{name}`", self.entry.id))
    }

    pub fn n(&self) -> u64 {
        self.n.unwrap_or_else(|| panic!("`{}` has no horizon", self.entry.id))
    }

    pub fn trajectories(&self) -> usize {
        self.trajectories.unwrap_or_else(|| panic!("`{}` has no trajectory count", self.entry.id))
    }

    /// `model` is selected, directly or through `all`.
    pub fn wants(&self, model: &str) -> bool {
        self.model == "all" || self.model == model
    }

    /// The configuration as it was actually used.
    pub fn echo(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: Some(self.entry.id.to_string()),
            seed: Some(self.seed),
            model: Some(self.model.clone()),
            n: self.n.map(|v| v as f64),
            trajectories: self.trajectories.map(|v| v as f64),
            out: self.out.clone(),
            params: self.params.clone(),
            thresholds: self.thresholds.clone(),
        }
    }
}
