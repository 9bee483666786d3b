//! Scenario-driven front end for `magdip-core`: strict TOML scenario files,
//! one-axis parameter sweeps, fixed-format CSV and matrix output with a hashed
//! manifest, and closed-form-vs-oracle reports.

pub mod error;
pub mod oracle;
pub mod output;
pub mod run;
pub mod scenario;

pub use error::{exit, RunError};
pub use oracle::{oracle_check, OracleReport, OracleRow, OracleStatus};
pub use run::{run_scenario, RunOptions, RunSummary};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError};
