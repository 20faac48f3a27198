//! Configuration, output and command implementations behind the `herding`
//! binary.

pub mod commands;
pub mod config;
pub mod output;

pub use config::{load_config, parse_config, ConfigError, ConfigFile, LoadedConfig};
pub use output::{
    read_daily_csv, write_daily_csv, write_sweep, OutputError, RunSidecar, SweepSidecar,
};
