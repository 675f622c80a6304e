//! Configuration ingestion, command dispatch, and CSV and manifest output.

pub mod config;
pub mod output;
mod run;

pub use config::{CommandName, RunConfig};
pub use output::{emit_csv, format_float, spectrum_table, Manifest, Table};
pub use run::{config_hash, run, RunOutcome, MANIFEST_FILE};
