use std::path::PathBuf;

use thiserror::Error;

use crate::set::ElementId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} is outside the ground set of size {n}")]
    ElementOutOfRange { element: ElementId, n: usize },

    #[error("element {0} is already in the set")]
    ElementAlreadyPresent(ElementId),

    #[error("weight coordinate {index} = {value} is outside [0,1]")]
    WeightOutOfRange { index: usize, value: f64 },

    #[error("weight vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("set {0} is not feasible")]
    Infeasible(String),

    #[error("pool of {size} elements exceeds the enumeration cap of {cap}")]
    PoolTooLarge { size: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
