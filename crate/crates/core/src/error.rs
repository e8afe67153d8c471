use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for a graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("self loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({i}, {j}) has invalid weight {w}; weights must be finite and nonnegative")]
    NegativeWeight { i: usize, j: usize, w: f64 },
    #[error("a topology needs at least one vertex")]
    EmptyTopology,
    #[error("weight matrix violates symmetry, zero diagonal or nonnegativity at ({0}, {1})")]
    InvalidWeightMatrix(usize, usize),
    #[error("exponent alpha = {0} is out of range")]
    AlphaOutOfRange(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("vector is not orthogonal to the ones vector (sum = {0})")]
    NotZeroSum(f64),
    #[error("topology is disconnected")]
    DisconnectedTopology,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("state contains a non-finite entry")]
    NonFiniteState,
    #[error("time {0} lies beyond the end of a non-cyclic schedule")]
    TimeBeyondSchedule(f64),
    #[error("unknown topology id `{0}`")]
    UnknownTopologyId(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("state became non-finite at t = {t}")]
    NumericalBlowup { t: f64 },
    #[error("operation is not defined for protocol {0}")]
    ProtocolMismatch(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("exhaustive search over {0} vertices is too large (limit is 8)")]
    SearchSpaceTooLarge(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
