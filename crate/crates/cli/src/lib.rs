//! Command-line front end for `gdm-obstacle`: configuration loading, single
//! runs, self-convergence studies, discretisation diagnostics and the
//! enumeration oracle.

pub mod commands;
pub mod config;
pub mod output;
pub mod study;

pub use commands::{cmd_converge, cmd_diagnose, cmd_oracle, cmd_run, load_config, CliError, Overrides};
pub use config::{ConfigError, RunConfig};
