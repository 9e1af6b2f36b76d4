//! Experiment harness for `ergodic-core`: the catalog of experiments, their
//! configuration, parallel execution, and JSON/CSV output.

pub mod catalog;
pub mod config;
pub mod envelope;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod output;

pub use catalog::{catalog, find, Entry};
pub use config::{ExperimentConfig, Run};
pub use envelope::{execute, Outcome, ResultEnvelope, Table, Verdict};
pub use error::{LabError, LabResult};
pub use exec::Parallel;
