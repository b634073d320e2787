use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive fluid depth h = {h:e}")]
    NonPositiveDepth { h: f64 },

    #[error("metric determinant {det:e} below floor (pole singularity)")]
    PoleSingularity { det: f64 },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("least-squares stencil of cell {cell} is singular")]
    SingularStencil { cell: usize },

    #[error("degenerate cell {cell} with area {area:e}")]
    DegenerateCell { cell: usize, area: f64 },

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("scenario `{0}` has no exact solution")]
    MissingExactSolution(String),

    #[error("degenerate ratio in convergence order: {0}")]
    DegenerateRatio(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cell {cell} at t = {time}: {source}")]
    AtCell {
        cell: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_cell(self, cell: usize, time: f64) -> Self {
        match self {
            e @ Error::AtCell { .. } => e,
            e => Error::AtCell {
                cell,
                time,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
