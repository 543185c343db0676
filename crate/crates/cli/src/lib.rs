//! Experiment driver for surface-aligned Miura-ori design: configuration, the
//! run pipeline, ablations and sweeps, and OBJ/SVG/CSV exporters.

pub mod config;
pub mod error;
pub mod experiments;
pub mod export;
pub mod presets;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, Result};
