use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid stratification: {0}")]
    InvalidStratification(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    /// An edge cluster did not touch exactly two vertex clusters.
    #[error("edge cluster {edge_cluster} touches {} vertex clusters {touching:?}, expected 2", touching.len())]
    Incidence {
        edge_cluster: usize,
        touching: Vec<usize>,
    },

    #[error("edge clusters {first} and {second} both join vertex clusters {vertices:?}")]
    ParallelEdges {
        first: usize,
        second: usize,
        vertices: (usize, usize),
    },

    #[error("graph with {0} vertices exceeds the supported isomorphism size")]
    UnsupportedSize(usize),

    #[error("graphs are not isomorphic")]
    NotIsomorphic,

    #[error("unknown spatial index `{0}`")]
    UnknownIndex(String),

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
