use std::path::PathBuf;

use crate::geodesic::GeodesicCurve;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite state point passed to potential evaluation")]
    NonFiniteInput,

    #[error("well index {index} out of range for potential with {wells} wells")]
    WellIndex { index: usize, wells: usize },

    #[error("geodesic optimizer stalled after {iterations} iterations (best length {best_length})")]
    GeodesicStalled {
        iterations: usize,
        best_length: f64,
        best: Box<GeodesicCurve>,
    },

    #[error("transition profile relaxation did not reach residual {tol} (best {residual})")]
    ProfileNotConverged { residual: f64, tol: f64 },

    #[error("grid dimension {0} unsupported (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("cells per axis must be a power of two and at least 8, got {0}")]
    BadGridResolution(usize),

    #[error("field length {got} does not match grid with {expected} cells")]
    ShapeMismatch { got: usize, expected: usize },

    #[error("snapshot header invalid: {0}")]
    SnapshotHeader(String),

    #[error("snapshot payload truncated: expected {expected} bytes, found {found}")]
    SnapshotTruncated { expected: u64, found: u64 },

    #[error("explicit CFL bound violated: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("operation requires a scalar order parameter (N = 1), got N = {0}")]
    RequiresScalar(usize),

    #[error("minimizing movements requires the plain dynamics")]
    MinimizingMovementVariant,

    #[error(
        "minimizing-movement descent stalled after {iterations} iterations \
         (gradient norm {grad_norm}, tolerance {tol})"
    )]
    MinimizingMovementStalled {
        iterations: usize,
        grad_norm: f64,
        tol: f64,
        best: Vec<Vec<f64>>,
    },

    #[error("run aborted at step {step} (t = {time}): {source}")]
    RunAborted {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("window values must lie in [0, 1], found {0}")]
    WindowRange(f64),

    #[error("direction must be a unit vector, |nu*| = {0}")]
    NotUnitDirection(f64),

    #[error("trajectory needs at least {needed} recorded states, got {got}")]
    TooFewStates { needed: usize, got: usize },

    #[error("time grids mismatch between diagnostics and mesh series at index {0}")]
    TimeGridMismatch(usize),

    #[error("phase {0} is absent from the partition")]
    PhaseAbsent(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
