//! Experiment engine and persistence behind the command-line interface.

pub mod config;
pub mod experiments;
pub mod fits;
pub mod output;

pub use config::{BoundarySpec, ExperimentConfig, GFamily, ThetaRefSpec};
pub use experiments::{run, EventSpec, ExperimentKind, RunOutput};
pub use output::write_outputs;
