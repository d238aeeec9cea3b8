//! Experiment configuration: a flat TOML file with one table per concern.
//!
//! Unknown keys are rejected. The grammar is documented in the README; every
//! value is a plain number, string or boolean so configs diff cleanly.

use crate::error::{Error, Result};
use crate::params::{MultiplierParams, PhysicalParams, Regime};
use crate::symbols::ModeGrid;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Preset this run belongs to; selects the audit bundle.
    pub preset: String,
    pub seed: u64,
    /// Validation regime for the physical parameters.
    pub regime: Regime,
    /// Integrator tolerance (relative and absolute).
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Write the per-mode trajectory CSV (energies are always written).
    #[serde(default = "default_true")]
    pub write_trajectory: bool,
    pub phys: PhysicalParams,
    /// Defaults derived from `phys` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<MultiplierParams>,
    pub grid: ModeGrid,
    pub time: TimeSpec,
    pub initial_data: InitialDataConfig,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    pub n_outputs: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Initial-data description. `kind` selects the generator; only the fields it
/// needs may be set (the generator rejects missing ones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialDataConfig {
    /// One of: single-mode, random-band, gaussian-00, gradient-field, custom-list.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u3: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_zero_k: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_symmetric: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_u2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_u3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<CustomEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomEntry {
    pub k: i64,
    pub eta: f64,
    pub l: i64,
    #[serde(default)]
    pub b: [f64; 2],
    #[serde(default)]
    pub u1: [f64; 2],
    #[serde(default)]
    pub u2: [f64; 2],
    #[serde(default)]
    pub u3: [f64; 2],
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        crate::params::require_valid(&self.phys, self.regime)?;
        if !(self.tol >= 1e-13 && self.tol <= 1e-4) {
            return Err(Error::Config(format!(
                "tol {} outside [1e-13, 1e-4]",
                self.tol
            )));
        }
        if self.time.n_outputs < 2 || !(self.time.t_end > 0.0) {
            return Err(Error::Config("need t_end > 0 and n_outputs >= 2".into()));
        }
        Ok(())
    }

    /// Multiplier parameters, defaulted from the physical ones when absent.
    pub fn multiplier_params(&self) -> MultiplierParams {
        self.multiplier
            .unwrap_or_else(|| crate::params::default_multiplier_params(&self.phys))
    }

    pub fn time_grid(&self) -> Result<crate::dynamics::primitive::TimeGrid> {
        match self.time.spacing {
            Spacing::Linear => {
                crate::dynamics::primitive::TimeGrid::linear(self.time.t_end, self.time.n_outputs)
            }
            Spacing::Log => {
                crate::dynamics::primitive::TimeGrid::log(self.time.t_end, self.time.n_outputs)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> String {
        r#"
preset = "enhanced-dissipation"
seed = 42
regime = "nonzero-mode"
tol = 1e-10

[phys]
mu = 1e-3
lambda = 0.0
eps = 1.0

[grid]
k_max = 1
l_max = 0
eta_max = 1.0
delta_eta = 0.05

[time]
t_end = 30.0
n_outputs = 200
spacing = "log"

[initial_data]
kind = "random-band"
amplitude = 1.0
eta_width = 0.5
include_zero_k = false
conjugate_symmetric = false
"#
        .to_string()
    }

    #[test]
    fn parse_and_round_trip() {
        let cfg = ExperimentConfig::parse(&sample()).unwrap();
        assert_eq!(cfg.preset, "enhanced-dissipation");
        assert_eq!(cfg.seed, 42);
        let text = cfg.to_toml();
        let again = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
        // Normalized form is a fixed point of serialize . parse.
        assert_eq!(text, again.to_toml());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = sample().replace("seed = 42", "seed = 42\nbogus_key = 1");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let bad = sample().replace("mu = 1e-3", "mu = 1e-3\nwhatever = 2.0");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn invalid_params_rejected_on_load() {
        let bad = sample().replace("mu = 1e-3", "mu = 0.0");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }
}
