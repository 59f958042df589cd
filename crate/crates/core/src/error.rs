use std::fmt;

use thiserror::Error;

/// Direction of an η-tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// η → +∞
    Plus,
    /// η → −∞
    Minus,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Plus => f.write_str("eta -> +inf"),
            Direction::Minus => f.write_str("eta -> -inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NonHermitian { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("unknown guarded function `{0}`")]
    UnknownFunction(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("form degree q = {q} out of range for n = {n}")]
    DegreeOutOfRange { n: usize, q: usize },

    #[error("exterior exponential paths disagree (relative deviation {deviation:e})")]
    PathMismatch { deviation: f64 },

    #[error("eta-integral diverges as {direction}")]
    DivergentIntegral { direction: Direction },

    #[error("eta-truncated density requires beta = 0 (got {beta})")]
    NonRigidTruncation { beta: f64 },

    #[error("eta = {eta} lies on a signature boundary of the pencil")]
    OnSignatureBoundary { eta: f64 },

    #[error("pencil determinant vanishes identically")]
    IdenticallyDegeneratePencil,

    #[error("manifold descriptor has no points")]
    EmptyDescriptor,

    #[error("descriptor points have mixed dimensions ({first} and {other})")]
    MixedDimension { first: usize, other: usize },

    #[error("adaptive quadrature exceeded {limit} subdivisions")]
    MaxSubdivisions { limit: usize },

    #[error("grid field reaches the boundary (relative magnitude {ratio:e})")]
    BoundaryContamination { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trace has non-negligible imaginary part {imag:e}")]
    ComplexResidue { imag: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
