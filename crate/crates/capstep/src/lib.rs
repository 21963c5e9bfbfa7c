//! Simulation, file formats and command-line plumbing around `capstep-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod estimate;
pub mod plant;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use config::{FileConfig, SimConfig};
pub use error::{Error, Result};
pub use run::{run_scenario, Outcome, RunOptions, RunReport, RunResult};
pub use scenario::{Mode, Scenario};
