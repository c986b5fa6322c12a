//! Suite configuration: one JSON file, overridable from the command line.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Calculus kernel identities.
    Kernel,
    #[value(name = "g1_s3")]
    #[serde(rename = "g1_s3")]
    G1S3,
    #[value(name = "g2_s3")]
    #[serde(rename = "g2_s3")]
    G2S3,
    #[value(name = "g2_s5")]
    #[serde(rename = "g2_s5")]
    G2S5,
    #[value(name = "disk_hypersurface")]
    DiskHypersurface,
    Subcritical,
    Prelag,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::G1S3 => "g1_s3",
            Suite::G2S3 => "g2_s3",
            Suite::G2S5 => "g2_s5",
            Suite::DiskHypersurface => "disk_hypersurface",
            Suite::Subcritical => "subcritical",
            Suite::Prelag => "prelag",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Samples per pointwise check.
    pub samples: usize,
    /// Samples on bindings.
    pub binding_samples: usize,
    /// Start points per flow check.
    pub flow_starts: usize,
    /// Disk-bundle points compared against the Dehn twist.
    pub monodromy_samples: usize,
    /// Random evaluations of the kernel identities.
    pub kernel_evaluations: usize,
    /// Margin threshold for positivity checks.
    pub threshold: f64,
    /// RK4 step for the closed-form flow comparison.
    pub flow_step: f64,
    /// RK4 step for return and monodromy comparisons.
    pub compare_step: f64,
    pub eps_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 1,
            samples: 500,
            binding_samples: 100,
            flow_starts: 20,
            monodromy_samples: 20,
            kernel_evaluations: 3000,
            threshold: 1e-3,
            flow_step: 1e-4,
            compare_step: 1e-3,
            eps_grid: vec![0.0, 0.01, 0.05, 0.1],
            t_grid: openbook_core::bourgeois::default_t_grid(),
            tau_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            out: None,
            format: Format::Json,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive =
            [("threshold", self.threshold), ("flow_step", self.flow_step), ("compare_step", self.compare_step)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("samples", self.samples),
            ("binding_samples", self.binding_samples),
            ("flow_starts", self.flow_starts),
            ("monodromy_samples", self.monodromy_samples),
            ("kernel_evaluations", self.kernel_evaluations),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::Invalid(format!("{name} must be at least 1")));
            }
        }
        for (name, grid) in [("eps_grid", &self.eps_grid), ("t_grid", &self.t_grid), ("tau_grid", &self.tau_grid)] {
            if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(CliError::Invalid(format!("{name} must be a nonempty list of finite values >= 0")));
            }
        }
        Ok(())
    }
}
