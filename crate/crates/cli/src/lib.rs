//! Experiment runner for `ecsim-core`: config files, deterministic CSV and
//! JSON output, state dumps and parallel Monte Carlo.

pub mod cli;
pub mod config;
pub mod dump;
pub mod error;
pub mod experiments;
pub mod output;

pub use error::CliError;
