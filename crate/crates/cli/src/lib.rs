//! Experiment runner comparing the orthogonality of Arnoldi variants on BML matrices.

pub mod certificate;
pub mod config;
pub mod error;
pub mod experiment;
pub mod mmio;

pub use config::{CaseSpec, ExperimentConfig, Method, Settings};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, ExperimentRecord, ExperimentRow};
