use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no edges")]
    EmptyGraph,

    #[error("node id {0} is not a positive integer")]
    InvalidNodeId(u64),

    #[error("self-loop on node {0}")]
    SelfLoop(u64),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u64, u64),

    #[error("edge {u}-{v} has non-positive weight {weight}")]
    NonPositiveWeight { u: u64, v: u64, weight: f64 },

    #[error("graph is disconnected ({components} components); a connected graph is required")]
    DisconnectedGraph { components: usize },

    #[error("eigensolver failed: {0}")]
    NumericalFailure(String),

    #[error(
        "eigenvalue 0 has multiplicity > 1 (lambda_2 = {lambda2:e} < tol {tol:e}); the graph is likely disconnected"
    )]
    ZeroEigenvalueMultiplicity { lambda2: f64, tol: f64 },

    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} = {value} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("index set does not contain the constant eigenvector (index 1)")]
    MissingIndexOne,

    #[error("|J| = {j_len} exceeds sparsity target k = {k}")]
    SparsityTooSmall { j_len: usize, k: usize },

    #[error("cost vector has a non-finite entry at node index {0}")]
    NonFiniteCost(usize),

    #[error("linear program is unbounded; the normalization row is missing or malformed")]
    Unbounded,

    #[error("linear program is infeasible (phase I residual {0:e})")]
    Infeasible(f64),

    #[error("simplex did not terminate after {0} pivots")]
    NumericalCycling(usize),

    #[error("basic solution has support {support} > {rows} constraint rows")]
    SupportBoundViolated { support: usize, rows: usize },

    #[error("signal has zero mean; percent error is undefined")]
    ZeroMeanSignal,

    #[error("signal set is empty")]
    EmptySignalSet,

    #[error("node {0} has no coordinates")]
    MissingCoordinates(u64),

    #[error("invalid coordinate ({lat}, {lon})")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("cannot parse timestamp {0:?}")]
    InvalidTimestamp(String),

    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
