use thiserror::Error;

use crate::network::Vertex;

/// Errors raised by network construction, continuation and certification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing potential value at vertex {0}")]
    MissingData(Vertex),

    #[error("ill-posed continuation step at vertex {vertex}: {unknown} unknown neighbors")]
    IllPosedStep { vertex: Vertex, unknown: usize },

    #[error("operation requires the exact rational backend")]
    WrongBackend,

    #[error("minor enumeration budget exceeded: dimension {dim} > {max}")]
    BudgetExceeded { dim: usize, max: usize },

    #[error("interior Kirchhoff block is singular (interior component not connected to the boundary)")]
    SingularInterior,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
