use thiserror::Error;

/// Errors produced by the series, geometry, quadrature and multiplier layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("multi-index {alpha:?} lies outside the truncation box {bounds:?}")]
    IndexOutsideBox {
        alpha: Vec<usize>,
        bounds: Vec<usize>,
    },

    #[error("non-finite coefficient at flat index {index}")]
    NonFiniteCoefficient { index: usize },

    #[error("point has a zero coordinate (index {coordinate}); the operation needs coordinatewise inversion")]
    HyperplanePoint { coordinate: usize },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid geometry parameter: {0}")]
    InvalidGeometry(String),

    #[error("no separating circle exists: {0}")]
    NoSeparatingContour(String),

    #[error("contour placement failed: {0}")]
    ContourPlacement(String),

    #[error("node count {got} too small, need at least {needed}")]
    NodeCountTooSmall { needed: usize, got: usize },

    #[error("integrand not evaluable at node {node:?}: {reason}")]
    NodeEvaluation {
        node: Vec<(f64, f64)>,
        reason: String,
    },

    #[error("point lies inside or on the functional's contour in factor {factor}")]
    InsideContour { factor: usize },

    #[error("domain is not a product of discs; multiplier construction is refused")]
    NonRungeDomain,

    #[error("kernel cannot be carried inside z^-1*domain at sampled z = {z:?}: {reason}")]
    MembershipSampleFailure { z: Vec<(f64, f64)>, reason: String },

    #[error("point {z:?} is not in the domain")]
    PointOutsideDomain { z: Vec<(f64, f64)> },

    #[error("the domain does not contain the all-ones point")]
    OnePointNotInDomain,

    #[error("delta sequence too short: need weight index {needed}, have length {len}")]
    DeltaTooShort { needed: usize, len: usize },

    #[error("invalid delta sequence: {0}")]
    InvalidDelta(String),

    #[error("germ constraint violated: {0}")]
    InvalidGerm(String),

    #[error("multiplier provenance does not support this operation: {0}")]
    ProvenanceUnsupported(String),

    #[error("domains differ between operands")]
    DomainMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
