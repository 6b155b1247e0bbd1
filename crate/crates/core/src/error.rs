//! Shared error type for the motion pipeline.

use thiserror::Error;

/// Errors surfaced by motion, simulation, and training operations.
#[derive(Debug, Error)]
pub enum MorphError {
    /// Caller handed in data that violates a precondition (bad lengths,
    /// unknown presets, out-of-range frames, malformed values).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two structures that must agree (skeletons, layer shapes) do not.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// Geometry collapsed to a configuration where the requested quantity
    /// is undefined (zero-length axis, coincident points).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// The simulator produced non-finite state; the episode is unusable.
    #[error("simulation diverged: {0}")]
    SimulationDiverged(String),

    /// An optimizer step could not be applied (non-finite gradients).
    #[error("optimization error: {0}")]
    Optimization(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MorphError>;

impl MorphError {
    /// Exit code the CLI maps this error to: 1 for bad input, 2 for
    /// internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            MorphError::InvalidInput(_)
            | MorphError::Structural(_)
            | MorphError::DegenerateGeometry(_)
            | MorphError::Io(_)
            | MorphError::Json(_) => 1,
            MorphError::SimulationDiverged(_) | MorphError::Optimization(_) => 2,
        }
    }
}
