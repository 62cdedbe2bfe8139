//! Experiment harness behind the `poleladder` binary: single transports,
//! convergence sweeps, series checks and exactness certification, with
//! seeded randomness and CSV output.

mod cli;
mod commands;
mod config;

pub use cli::{run_cli, Cli};
pub use commands::{
    exactness_sweep, exactness_trial, random_trial, relative_oracle_error, OPEN_REACH, required_bch_slope, run,
    CommandOutput, ExactnessSummary, ExitStatus, TrialOutcome, BCH_ORDERS,
};
pub use config::{Command, ConfigError, ConfigFile, ExperimentConfig, FLEET};
