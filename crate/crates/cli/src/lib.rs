//! Configuration-driven sweeps over the ground-state solvers.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ConfigError, RunConfig};
pub use runner::{run_sweep, Row, Solved};
