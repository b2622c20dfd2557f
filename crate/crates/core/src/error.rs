use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("linear system I - C is singular: {0}")]
    SingularSystem(String),
    #[error("row {0} of the overlap matrix is empty")]
    EmptyRow(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("negative initial data on edge {edge}, cell {cell}")]
    NegativeInput { edge: usize, cell: usize },
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("metric graph is not equilateral (edge {0} has length != 1)")]
    NotEquilateral(usize),
    #[error("singular assembly: {0}")]
    SingularAssembly(String),
    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("non-finite value at t = {0}")]
    NonFinite(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("pencil (B - mu I, D) has no finite eigenvalues for mu = {0}")]
    SingularPencil(String),
    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite traffic state at step {0}")]
    NonFiniteState(u64),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}
