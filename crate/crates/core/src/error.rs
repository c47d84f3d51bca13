use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("space has no coordinates")]
    NoCoords,
    #[error("space has no boundary markers")]
    NoBoundary,
    #[error("path has zero length")]
    ZeroLengthPath,
    #[error("point index {index} out of range for a space with {len} points")]
    BadIndex { index: usize, len: usize },
    #[error("negative scale factor {0}")]
    NegativeScale(f64),
    #[error("measures or densities live on different spaces")]
    SpaceMismatch,
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("family sequence is not monotone: member {member} of E_{k} is missing from E_{next}", next = .k + 1)]
    NotMonotone { k: usize, member: String },
    #[error("k = {k} is too fine for the grid: 2^-k = {scale} is below one cell width {cell}")]
    TooFineK { k: usize, scale: f64, cell: f64 },
    #[error("rejected input: {0}")]
    RejectInput(String),
    #[error("insufficient index sets: need U_{needed}, only {available} available")]
    InsufficientSets { needed: usize, available: usize },
    #[error("construction invariant violated: {0}")]
    ConstructionInvariant(String),
}
