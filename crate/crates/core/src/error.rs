use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} inverted (area {area:e}); lower the distortion factor")]
    InvertedCell { cell: usize, area: f64 },

    #[error("boundary face {face} at ({x}, {y}) matched {matches} tagging predicates, expected exactly one")]
    BoundaryTagging { face: usize, x: f64, y: f64, matches: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("pure Dirichlet problem needs a pressure constraint (pressure_constraint = zero_mean)")]
    MissingPressureConstraint,

    #[error("pressure constraint already appended to this system")]
    ConstraintAlreadyApplied,

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("linear solve residual {residual:e} exceeds bound {bound:e}")]
    InaccurateSolve { residual: f64, bound: f64 },

    #[error("dense eigensolve refused: dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("non-finite residual at Newton iteration {iteration}")]
    NonFiniteResidual { iteration: usize },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{context}: {source}")]
    Level {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Empty(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at_level(self, context: impl Into<String>) -> Self {
        Error::Level { context: context.into(), source: Box::new(self) }
    }
}
