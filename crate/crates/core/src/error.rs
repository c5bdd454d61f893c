use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CoarseError {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("pair image is sheared and not representable as a relation: {0}")]
    NotRepresentable(String),
    #[error("map is not coarse: {0}")]
    NotCoarse(String),
    #[error("sheared pair image of generator {0} cannot be adjoined")]
    UnsupportedShear(String),
    #[error("product outside the representable fragment: {0}")]
    UnsupportedProduct(String),
    #[error("not a unital subspace: {0}")]
    NotUnitalSubspace(String),
    #[error("no coarse map into the terminated space was found: {0}")]
    NoMapToTerminated(String),
    #[error("not sigma-unital: {0}")]
    NotSigmaUnital(String),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("no closed form for this query: {0}")]
    Unsupported(String),
}

pub type Result<T, E = CoarseError> = std::result::Result<T, E>;
