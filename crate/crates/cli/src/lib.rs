//! Config loading and experiment orchestration behind the `horizon-bench` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{Diverged, Options, Outcome};
pub use config::{ConfigError, Experiment};
