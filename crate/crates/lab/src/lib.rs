//! Orchestration for the wkbflow solvers: configuration, run drivers,
//! cross-tier comparison, ε-studies and invariant check suites.

pub mod acceptance;
pub mod averaging;
pub mod checks;
pub mod cli;
pub mod compare;
pub mod config;
pub mod convergence;
pub mod error;
pub mod fields;
pub mod presets;
pub mod runs;

pub use config::RunConfig;
pub use error::{LabError, LabResult};
