//! Command-line plumbing for `rover-health`: scenario files, telemetry CSV,
//! SVG plots and cross-run reports.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod report;
pub mod telemetry;

pub use config::{
    builtin_config, config_hash, parse_config, parse_config_str, parse_config_with, write_config, Override,
};
pub use error::{CliError, Result};
pub use plot::{emit_plots, PlotData};
pub use report::{report, Report, RunEntry};
pub use telemetry::{export_csv, write_csv, CsvTable, CSV_COLUMNS};
