//! Configuration, file formats and the command pipeline for simulated fermionic averaged
//! circuit eigenvalue sampling experiments.

pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
