//! Scenario files, result formats, batch sweeps and the `origami-grasp`
//! command line on top of `origami-grasp-core`.

pub mod commands;
pub mod demos;
pub mod error;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use commands::{Outcome, ScenarioCommand, Status};
pub use error::CliError;
pub use output::{Cell, Format, ResultRecord, Table};
pub use scenario::{parse_scenario, parse_scenario_with, to_toml, MaterialTable, ScenarioErrors, ScenarioFile};
pub use sweep::run_sweep;
