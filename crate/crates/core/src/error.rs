use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot place a zero or non-finite vector on the sphere")]
    DegenerateVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite integrand value {value} at node {node}")]
    NonFiniteIntegrand { node: usize, value: f64 },

    #[error("cannot normalize density `{label}` with mass {mass}")]
    Normalization { label: String, mass: f64 },

    #[error("witness antisymmetry violated: {0}")]
    WitnessAntisymmetry(String),

    #[error("ambiguous label: |<v,w>| = {0:e} is within the hyperplane tolerance")]
    AmbiguousLabel(f64),

    #[error("point is not in the open set where every |f_i| < 1 (max |f_i| = {0})")]
    NotInOmega(f64),

    #[error("no equatorial sample met region U_{0}")]
    RegionNotMet(usize),

    #[error("degenerate basis: orientation determinant vanished")]
    DegenerateBasis,

    #[error("no sample landed in the level set A ({0} sample pairs)")]
    EmptyLevelSet(usize),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
}
