use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("k = {k} is within {k_min:e} of the pole at k = 0 (order {order})")]
    PoleProximity { k: Complex64, k_min: f64, order: u32 },
    #[error("{0}")]
    Domain(String),
    #[error("matrix is singular to working precision at k = {k} (pivot ratio {pivot_ratio:e})")]
    Singular { k: Complex64, pivot_ratio: f64 },
    #[error("determinant is numerically zero near k = {k} (|D| = {modulus:e})")]
    NearZero { k: Complex64, modulus: f64 },
    #[error("contour passes within the guard distance of a zero near k = {near}")]
    GuardViolation { near: Complex64 },
    #[error("winding number {value} is not within tolerance of an integer")]
    NonInteger { value: f64 },
    #[error("subdivision exhausted: zero cluster of multiplicity {multiplicity} in a box of size {size:e} at {center}")]
    Cluster { center: Complex64, size: f64, multiplicity: i64 },
    #[error("pole order fit slope {slope} is not close to an integer")]
    Indeterminate { slope: f64 },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short reason code for tabular output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidCoefficients(_) => "invalid_coefficients",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::Domain(_) => "domain",
            Error::Singular { .. } => "singular",
            Error::NearZero { .. } => "near_zero",
            Error::GuardViolation { .. } => "guard_violation",
            Error::NonInteger { .. } => "non_integer_winding",
            Error::Cluster { .. } => "cluster",
            Error::Indeterminate { .. } => "indeterminate",
            Error::Config(_) => "config",
        }
    }
}
