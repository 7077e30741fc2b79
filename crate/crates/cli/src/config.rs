//! Experiment configuration, read from a single JSON document.

use std::path::{Path, PathBuf};

use rou_core::estimate::{EstimateConfig, SigmaDomain};
use rou_core::ROUParams;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub true_params: ROUParams,
    pub h: f64,
    pub n_list: Vec<usize>,
    pub substeps: usize,
    /// Spectral truncation level.
    #[serde(rename = "N")]
    pub truncation: usize,
    /// σ search interval as `[lo, hi]`.
    #[serde(rename = "D_sigma")]
    pub sigma_domain: [f64; 2],
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            true_params: ROUParams {
                kappa: 1.0,
                theta: 1.0,
                sigma: 0.5,
            },
            h: 0.5,
            n_list: vec![2000, 3000, 4000, 5000, 6000, 8000],
            substeps: rou_core::simulate::DEFAULT_SUBSTEPS,
            truncation: rou_core::spectral::DEFAULT_TRUNCATION,
            sigma_domain: [0.05, 5.0],
            seeds: (0..20).collect(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if let Err(e) = self.true_params.validate() {
            return usage(format!("true_params: {e}"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return usage(format!("h must be positive, got {}", self.h));
        }
        if self.n_list.is_empty() {
            return usage("n_list is empty".into());
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return usage(format!("every n needs at least 2 observations, got {n}"));
        }
        if self.substeps == 0 {
            return usage("substeps must be >= 1".into());
        }
        if self.truncation == 0 {
            return usage("N must be >= 1".into());
        }
        if self.seeds.is_empty() {
            return usage("seeds is empty".into());
        }
        self.domain()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<SigmaDomain, CliError> {
        SigmaDomain::new(self.sigma_domain[0], self.sigma_domain[1])
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn estimate_config(&self) -> Result<EstimateConfig, CliError> {
        Ok(EstimateConfig {
            sigma_domain: self.domain()?,
            truncation: self.truncation,
        })
    }
}
