use thiserror::Error;

use crate::structures::Family;

/// Errors raised by structure construction, exact linear algebra and the
/// closure machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("point {0} is not in the structure")]
    UnknownPoint(String),

    #[error("class {0} is not in the structure")]
    UnknownClass(String),

    #[error("level {level} is out of range for depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("{op} is not defined for the {family} family")]
    UnsupportedFamily { op: &'static str, family: Family },

    #[error("vectors belong to different inner-product spaces")]
    SpaceMismatch,

    #[error("generator {0} is not in the space")]
    UnknownGenerator(String),

    #[error("matrix is not symmetric")]
    NonSymmetric,

    #[error("matrix shape mismatch: {0}")]
    Shape(String),

    #[error("Gram matrix is not positive semidefinite")]
    NotPsd,

    #[error("{0} is not an element of the weak closure")]
    NotInClosure(String),

    #[error("malformed poset: {0}")]
    MalformedPoset(String),

    #[error("base vector does not lie in its domain")]
    BaseNotInDomain,

    #[error("weak-limit specification is not instantiable: {0}")]
    NotInstantiable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
