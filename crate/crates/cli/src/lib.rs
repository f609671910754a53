//! Command-line experiment driver.

pub mod config;
pub mod run;

pub use config::{Command, ExperimentConfig};
pub use run::{run, Outcome};
