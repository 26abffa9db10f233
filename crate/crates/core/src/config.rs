//! Flat `key = value` run configuration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candidates::{TemplateConfig, DEFAULT_ANCHORS, DEFAULT_SCALES, DEFAULT_SIGMA_C};
use crate::error::{Error, Result};
use crate::objective::ObjectiveParams;
use crate::ped::{DEFAULT_EMPTY_PENALTY, DEFAULT_PAIR_KEEP, DEFAULT_SIGMA};
use crate::synth;

/// `lambda1` and `k` default per command: the synthetic demo uses 2 and 6,
/// category selection uses 100 and the number of images.
pub const SYNTH_LAMBDA1: f64 = 2.0;
pub const SYNTH_K: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    pub lambda2: f64,
    pub sigma: f64,
    pub sigma_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knn_k: Option<usize>,
    pub m_keep: usize,
    /// Similarity threshold applied after kNN sparsification.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub d_empty: f64,
    pub seed: u64,
    pub scales: Vec<f64>,
    pub anchors: usize,
    pub per_cluster: usize,
    pub std: f64,
    pub gain_trace: bool,
    pub kd_tree: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tau: ObjectiveParams::DEFAULT_TAU,
            lambda1: None,
            lambda2: ObjectiveParams::DEFAULT_LAMBDA2,
            sigma: DEFAULT_SIGMA,
            sigma_c: DEFAULT_SIGMA_C,
            k: None,
            knn_k: None,
            m_keep: DEFAULT_PAIR_KEEP,
            eps: None,
            d_empty: DEFAULT_EMPTY_PENALTY,
            seed: synth::DEFAULT_SEED,
            scales: DEFAULT_SCALES.to_vec(),
            anchors: DEFAULT_ANCHORS,
            per_cluster: synth::DEFAULT_PER_CLUSTER,
            std: synth::DEFAULT_STD,
            gain_trace: true,
            kd_tree: false,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        ObjectiveParams::new(self.tau, self.lambda1.unwrap_or(0.0), self.lambda2)?;
        for (name, v) in [("sigma", self.sigma), ("sigma_c", self.sigma_c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.k == Some(0) {
            return Err(invalid("k must be at least 1".into()));
        }
        if self.knn_k == Some(0) {
            return Err(invalid("knn_k must be at least 1".into()));
        }
        if self.m_keep == 0 {
            return Err(invalid("m_keep must be at least 1".into()));
        }
        if let Some(e) = self.eps {
            if !(0.0..=1.0).contains(&e) {
                return Err(invalid(format!("eps must lie in [0, 1], got {e}")));
            }
        }
        if !(self.d_empty >= 0.0) || !self.d_empty.is_finite() {
            return Err(invalid(format!("d_empty must be finite and >= 0, got {}", self.d_empty)));
        }
        self.templates().validate()?;
        if self.per_cluster == 0 {
            return Err(invalid("per_cluster must be at least 1".into()));
        }
        if !(self.std >= 0.0) || !self.std.is_finite() {
            return Err(invalid(format!("std must be finite and >= 0, got {}", self.std)));
        }
        Ok(())
    }

    pub fn templates(&self) -> TemplateConfig {
        TemplateConfig { scales: self.scales.clone(), anchors: self.anchors }
    }

    /// Objective parameters with `lambda1` falling back to `default_lambda1`.
    pub fn objective_params(&self, default_lambda1: f64) -> Result<ObjectiveParams> {
        ObjectiveParams::new(self.tau, self.lambda1.unwrap_or(default_lambda1), self.lambda2)
    }
}
