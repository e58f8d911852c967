use thiserror::Error;
use wkbflow_core::torus_field::TorusGrid;
use wkbflow_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {message}")]
    Solver { context: String, message: String, source: CoreError },

    #[error("i/o: {0}")]
    Io(String),
}

impl LabError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Solver { .. } => 3,
            LabError::Io(_) => 1,
        }
    }

    /// Wraps a solver error, locating any reported collocation index on `grid`.
    pub fn solver(context: impl Into<String>, grid: &TorusGrid, source: CoreError) -> Self {
        LabError::Solver { context: context.into(), message: describe(&source, grid), source }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;

/// Error text followed by the grid coordinates of the offending node.
pub fn describe(err: &CoreError, grid: &TorusGrid) -> String {
    let index = match err {
        CoreError::NonFinite { index, .. }
        | CoreError::MeanNotZero { index, .. }
        | CoreError::NonPositiveDensity { index, .. }
        | CoreError::VanishingPhaseGradient { index, .. }
        | CoreError::SingularLabelMap { index, .. }
        | CoreError::ResonantDenominator { index, .. } => Some(*index),
        _ => None,
    };
    match index {
        Some(i) if i < grid.n_space() => {
            let x = grid.point(i);
            let at = x[..grid.dim()].iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ");
            format!("{err} (x = ({at}))")
        }
        _ => err.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locates_offending_node() {
        let g = TorusGrid::line(8.0, 8, 8).unwrap();
        let msg = describe(&CoreError::NonPositiveDensity { min: -1.0, index: 3 }, &g);
        assert!(msg.ends_with("(x = (3.000000))"), "{msg}");
        assert_eq!(LabError::solver("run", &g, CoreError::StepRejected("x".into())).exit_code(), 3);
    }
}
