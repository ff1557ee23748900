//! Experiment configuration shared by the flag parser and JSON config files.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::model::{LatticeBox, SpinValue};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Spectrum,
    FreeEnergy,
    Gap,
    Bounds,
    Rho2,
    Kernels,
    Greens,
    Paths,
    VerifyAll,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Spectrum => "spectrum",
            CommandName::FreeEnergy => "free-energy",
            CommandName::Gap => "gap",
            CommandName::Bounds => "bounds",
            CommandName::Rho2 => "rho2",
            CommandName::Kernels => "kernels",
            CommandName::Greens => "greens",
            CommandName::Paths => "paths",
            CommandName::VerifyAll => "verify-all",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    #[default]
    Fast,
    Full,
}

fn default_dim() -> usize {
    1
}

fn default_side() -> usize {
    4
}

fn default_two_s() -> u32 {
    1
}

/// Everything a run needs. Empty `beta` and `sides` select per-command
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandName,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_side")]
    pub side: usize,
    #[serde(default = "default_two_s")]
    pub two_s: u32,
    #[serde(default)]
    pub beta: Vec<f64>,
    /// Particle number `N` of a single sector.
    #[serde(default)]
    pub sector: Option<usize>,
    /// Override of the command's comparison tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Walk steps for `rho2` and `kernels`.
    #[serde(default)]
    pub steps: Option<usize>,
    /// Box sides for `paths`.
    #[serde(default)]
    pub sides: Vec<usize>,
    #[serde(default)]
    pub suite: Suite,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Adds wall times, which makes the output nondeterministic.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(command: CommandName) -> Self {
        ExperimentConfig {
            command,
            dim: default_dim(),
            side: default_side(),
            two_s: default_two_s(),
            beta: Vec::new(),
            sector: None,
            tol: None,
            steps: None,
            sides: Vec::new(),
            suite: Suite::Fast,
            out: None,
            format: Format::Csv,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn lattice(&self) -> Result<LatticeBox> {
        LatticeBox::new(self.dim, self.side)
    }

    pub fn spin(&self) -> Result<SpinValue> {
        SpinValue::new(self.two_s)
    }

    /// Checks every field that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        self.lattice()?;
        self.spin()?;
        if let Some(b) = self.beta.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::invalid(format!("beta must be positive and finite (got {b})")));
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid(format!("tol must be positive (got {t})")));
            }
        }
        if let Some(n) = self.sector {
            let max = self.two_s as usize * self.lattice()?.len();
            if n > max {
                return Err(Error::invalid(format!("sector {n} exceeds 2S|Lambda| = {max}")));
            }
        }
        if self.sides.iter().any(|&s| s < 2) {
            return Err(Error::invalid("path sides must be at least 2"));
        }
        if self.command == CommandName::Rho2 && self.sector.is_some_and(|n| n < 2) {
            return Err(Error::invalid("rho2 needs a sector with at least two particles"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_and_unknown_keys() {
        let cfg = ExperimentConfig::from_json(r#"{"command": "free-energy", "beta": [1.0, 2.0]}"#).unwrap();
        assert_eq!(cfg.side, 4);
        assert_eq!(cfg.format, Format::Csv);
        assert!(ExperimentConfig::from_json(r#"{"command": "gap", "sid": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"command": "gap", "side": 0}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::new(CommandName::VerifyAll);
        cfg.suite = Suite::Full;
        cfg.beta = vec![0.5];
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
