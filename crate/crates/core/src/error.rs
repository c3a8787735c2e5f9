use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum VemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate seed configuration: {0}")]
    DegenerateSeeds(String),
    #[error("unsupported order k = {0} (need 2 <= k <= 4)")]
    UnsupportedOrder(usize),
    #[error("quadrature rule unavailable: {0}")]
    QuadratureUnavailable(String),
    #[error("singular local system on element {element}: {detail}")]
    SingularElement { element: usize, detail: String },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("mesh file format error at line {line}: {detail}")]
    MeshFormat { line: usize, detail: String },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VemError>;
