use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not an isometry: {0}")]
    NotIsometric(String),

    #[error("not normalized: squared norm {0} differs from 1")]
    NotNormalized(f64),

    /// The semi-axis vector lies outside the physically possible region.
    #[error("{0}")]
    NotPossible(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("probabilities must be non-negative and sum to 1, got ({0}, {1})")]
    BadProbabilities(f64, f64),

    #[error("not physical: {0}")]
    NotPhysical(String),

    #[error("degenerate pair: the two Bloch vectors coincide")]
    DegeneratePair,

    #[error("value {value} out of range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("bad qubit index: {0}")]
    BadIndex(String),

    #[error("pair is not a positive optimal pair")]
    NotPositiveOptimal,

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
