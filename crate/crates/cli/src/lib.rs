//! Batch front end for `landdiv`: land-cover ingestion, scenarios, the
//! uniform and empirical pipelines and their CSV/JSON/SVG outputs.

pub mod app;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod output;
pub mod run_empirical;
pub mod run_uniform;
pub mod scenario;
pub mod svg;
pub mod synth;

pub use error::{CliError, CliResult};
