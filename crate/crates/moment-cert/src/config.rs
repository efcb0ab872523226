//! The JSON run configuration.

use std::path::PathBuf;

use moment_cert_core::VariableSpec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{DEFAULT_CONFIDENCE, DEFAULT_SAMPLES, MIN_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Moments,
    Bound,
    Verify,
    CheckLemmas,
    Scan,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// One entry of `variables`: a family descriptor, optionally repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableEntry {
    #[serde(flatten)]
    pub spec: VariableSpec,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub repeat: usize,
}

fn one() -> usize {
    1
}

fn is_one(n: &usize) -> bool {
    *n == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub variables: Vec<VariableEntry>,
    #[serde(default)]
    pub p_values: Vec<f64>,
    #[serde(default)]
    pub r_values: Vec<u32>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Quadrature tolerance, relative to the Gaussian moment of the sum.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// `verify`: a previously emitted `bound` document whose intervals are
    /// checked against the oracles.
    #[serde(default)]
    pub golden_path: Option<PathBuf>,
    /// `scan`: sequence lengths; the variables give the family shape.
    #[serde(default)]
    pub scan_n: Vec<usize>,
    /// `check-lemmas`: configurations per suite.
    #[serde(default = "default_configurations")]
    pub configurations: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_tol() -> f64 {
    1e-10
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

fn default_configurations() -> usize {
    1000
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// The variables with repeats expanded, in input order.
    pub fn expanded_variables(&self) -> Vec<VariableSpec> {
        self.variables
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.spec.clone(), e.repeat))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.command != Command::CheckLemmas && self.variables.is_empty() {
            return bad("at least one variable is required".into());
        }
        for e in &self.variables {
            if e.repeat == 0 {
                return bad("repeat must be at least 1".into());
            }
            e.spec
                .validate()
                .map_err(|err| Error::Config(format!("{}: {err}", e.spec.family_name())))?;
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            ));
        }
        if self.samples < MIN_SAMPLES {
            return bad(format!("samples must be at least {MIN_SAMPLES}"));
        }
        if let Some(p) = self
            .p_values
            .iter()
            .find(|p| !(p.is_finite() && **p >= 2.0))
        {
            return bad(format!("p values must be finite and at least 2, got {p}"));
        }
        if self.r_values.contains(&0) {
            return bad("r values must be at least 1".into());
        }
        match self.command {
            Command::Moments if self.p_values.is_empty() => bad("moments needs p_values".into()),
            Command::Bound | Command::Verify
                if self.p_values.is_empty() && self.r_values.is_empty() =>
            {
                bad(format!("{:?} needs p_values or r_values", self.command).to_lowercase())
            }
            Command::Scan if self.p_values.is_empty() || self.scan_n.is_empty() => {
                bad("scan needs p_values and scan_n".into())
            }
            Command::Scan if self.scan_n.contains(&0) => {
                bad("scan_n entries must be positive".into())
            }
            Command::CheckLemmas if self.configurations == 0 => {
                bad("configurations must be positive".into())
            }
            _ => Ok(()),
        }
    }
}
