//! Experiment configuration: a sectioned key-value file (TOML subset), a
//! content hash for reproducibility, and schema validation with the path to
//! the offending key on failure.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("config key {key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_resolution")]
    pub resolution_log2: u32,
}

fn default_resolution() -> u32 {
    12
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            resolution_log2: default_resolution(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_k_terms")]
    pub k_terms: usize,
    #[serde(default = "default_mollifier_order")]
    pub mollifier_order: u32,
    #[serde(default = "default_test_order")]
    pub test_order: u32,
}

fn default_alpha() -> f64 {
    0.6
}
fn default_gamma() -> f64 {
    0.9
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_k_terms() -> usize {
    12
}
fn default_mollifier_order() -> u32 {
    2
}
fn default_test_order() -> u32 {
    1
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            alpha: default_alpha(),
            gamma: default_gamma(),
            epsilon: default_epsilon(),
            k_terms: default_k_terms(),
            mollifier_order: default_mollifier_order(),
            test_order: default_test_order(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// mollification widths λ = 2^{-j} for each listed j
    #[serde(default = "default_lambda")]
    pub lambda_log2: Vec<u32>,
    /// partition / averaging levels n
    #[serde(default = "default_levels")]
    pub levels: Vec<u32>,
    /// dyadic mesh levels for the rough integral
    #[serde(default = "default_mesh")]
    pub mesh_levels: Vec<u32>,
    /// smoothing widths ε = 2^{-j} for the rough path sweeps
    #[serde(default = "default_widths")]
    pub widths_log2: Vec<u32>,
    /// weakened-exponent offset for the rough path metric
    #[serde(default = "default_eps_weak")]
    pub eps_weak: f64,
}

fn default_lambda() -> Vec<u32> {
    vec![2, 3, 4, 5, 6, 7]
}
fn default_levels() -> Vec<u32> {
    vec![1, 2, 3, 4, 5]
}
fn default_mesh() -> Vec<u32> {
    (4..=10).collect()
}
fn default_widths() -> Vec<u32> {
    vec![3, 4, 5, 6]
}
fn default_eps_weak() -> f64 {
    0.1
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            lambda_log2: default_lambda(),
            levels: default_levels(),
            mesh_levels: default_mesh(),
            widths_log2: default_widths(),
            eps_weak: default_eps_weak(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: String| ConfigError::Invalid {
            key: key.to_string(),
            message,
        };
        if self.model.alpha <= 0.0 || self.model.alpha >= 1.0 {
            return Err(invalid(
                "model.alpha",
                format!("must lie in (0,1), got {}", self.model.alpha),
            ));
        }
        if self.model.gamma <= 0.0 {
            return Err(invalid("model.gamma", "must be positive".into()));
        }
        if self.model.k_terms == 0 {
            return Err(invalid("model.k_terms", "must be at least 1".into()));
        }
        if self.grid.resolution_log2 < 6 || self.grid.resolution_log2 > 20 {
            return Err(invalid(
                "grid.resolution_log2",
                "must lie in 6..=20".into(),
            ));
        }
        for (key, list) in [
            ("sweep.lambda_log2", &self.sweep.lambda_log2),
            ("sweep.levels", &self.sweep.levels),
            ("sweep.mesh_levels", &self.sweep.mesh_levels),
            ("sweep.widths_log2", &self.sweep.widths_log2),
        ] {
            if list.is_empty() {
                return Err(invalid(key, "sweep lists must be nonempty".into()));
            }
        }
        Ok(())
    }

    pub fn widths_from_log2(list: &[u32]) -> Vec<f64> {
        list.iter().map(|&j| 0.5f64.powi(j as i32)).collect()
    }
}

/// FNV-1a content hash of the config text, embedded in every report.
pub fn config_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
