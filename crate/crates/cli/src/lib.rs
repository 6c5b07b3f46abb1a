//! Batch front end for `phenocluster`: runs the clustering pipeline on a
//! measurement CSV and writes JSON/CSV reports and SVG charts.

pub mod charts;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{KRange, PipelineConfig, Preset};
pub use error::{CliError, Result, EXIT_NUMERICAL, EXIT_VALIDATION};
pub use pipeline::{run_on_table, run_pipeline};
pub use report::{ModelExport, RunReport};
