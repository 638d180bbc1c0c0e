//! Command-line front end for `qed-sbs-core`.

pub mod config;
pub mod error;
pub mod oracle_check;
pub mod regime_table;
pub mod sbs_report;
pub mod sweep;

pub use config::{Preset, RunConfig};
pub use error::CliError;
