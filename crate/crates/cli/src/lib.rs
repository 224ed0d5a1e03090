//! Experiment harness and file-level access to the `randmat` solvers.

pub mod error;
pub mod experiments;
pub mod io;
pub mod stats;

pub use error::{CliError, Result};
pub use experiments::{run_experiment, Params, Series, EXPERIMENTS};
pub use stats::{write_csv, Row, TrialStats};
