//! CLI orchestration: configs, initial data, presets, persistence.

pub mod config;
pub mod initial_data;
pub mod presets;
pub mod run;

pub use config::ExperimentConfig;
pub use presets::{execute_mu_sweep, execute_preset, presets, run_configured, PresetReport};
