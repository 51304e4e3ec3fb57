//! Scenario runner behind the `gaussfisher` command.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{ScenarioConfig, ScenarioKind};
pub use error::{CliError, Result};
pub use scenario::{run_scenario, Table};
