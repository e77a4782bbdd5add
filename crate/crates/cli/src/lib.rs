//! Scenario configs, presets and file output for the `photon-store` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::{
    load_config, parse_config, parse_config_with, Mode, Overrides, Preset, ScenarioConfig,
};
pub use error::{CliError, ConfigError, Violation, ViolationKind};
pub use output::{Summary, Table};
pub use run::{compute, run_scenario, Report};
