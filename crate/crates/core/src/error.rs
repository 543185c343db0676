use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the parameter domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("surface chart is singular at ({x}, {y})")]
    SingularChart { x: f64, y: f64 },
    #[error("offset {epsilon} exceeds the minimum focal distance {focal} of the chart")]
    OffsetTooLarge { epsilon: f64, focal: f64 },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("rest triangle {0} is degenerate")]
    SingularTriangle(usize),
    #[error("edge {0} has zero length")]
    DegenerateEdge(usize),
    #[error("vertex fan at {0} has a zero-length edge")]
    DegenerateFan(usize),
    #[error("quad {0} has a degenerate normal")]
    DegenerateFace(usize),
    #[error("quad {quad} is not planar enough to develop (|g| = {residual:e}, gate {gate:e})")]
    PlanarityGate { quad: usize, residual: f64, gate: f64 },
    #[error("KKT factorization failed: {0}")]
    LinearSolve(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
