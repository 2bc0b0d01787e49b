use crate::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mesh length h = {0} must be positive and finite")]
    InvalidMeshLength(f64),

    #[error("lattice has no interior nodes (h = {h} too large for the domain)")]
    EmptyInterior { h: f64 },

    #[error("exact boundary mode: no lattice point lies on the domain boundary")]
    NoBoundaryLatticePoints,

    #[error("exact boundary mode: interior node at ({}, {}) has no lattice neighbour in direction {dir:?}", .point[0], .point[1])]
    MissingNeighbor { point: Point, dir: [i64; 2] },

    #[error("point ({}, {}) lies outside the closed domain", .0[0], .0[1])]
    OutsideDomain(Point),

    #[error("point ({}, {}) lies outside the triangulated hull of the lattice", .0[0], .0[1])]
    OutsideHull(Point),

    #[error("no admissible direction at node {node}")]
    NoDirection { node: usize },

    #[error("mesh function has {got} values, lattice has {expected} nodes")]
    SizeMismatch { expected: usize, got: usize },

    #[error("mesh functions live on different lattices")]
    LatticeMismatch,

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("source density f = {value} < 0 at node {node} ({}, {})", .point[0], .point[1])]
    NegativeSource { node: usize, point: Point, value: f64 },

    #[error("mesh length too large for the compact set: {0}")]
    CompactTooCoarse(String),

    #[error("precondition violated at node {node} ({}, {}): {what}", .point[0], .point[1])]
    Precondition { node: usize, point: Point, what: String },

    #[error("solver did not converge after {iterations} iterations (last residual {last_residual:e})")]
    NotConverged {
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("linear solver failed: {0}")]
    LinearSolve(String),

    #[error("linear program is unbounded at ({}, {}); point outside the sample hull", .0[0], .0[1])]
    UnboundedLp(Point),

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by user input, as opposed to failed checks or solver trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDomain(_)
                | Error::InvalidMeshLength(_)
                | Error::EmptyInterior { .. }
                | Error::NoBoundaryLatticePoints
                | Error::MissingNeighbor { .. }
                | Error::NegativeSource { .. }
                | Error::NonFinite { .. }
                | Error::SizeMismatch { .. }
                | Error::CompactTooCoarse(_)
                | Error::Config(_)
                | Error::Expr(_)
                | Error::Csv { .. }
                | Error::InvalidStencil(_)
                | Error::OutsideDomain(_)
        )
    }
}
