//! Fredholm determinants, scattering data and resonances for the third-order operator
//! H = ∂³ + p∂ + ∂p + q on the line, with p, q supported in [0, γ].

pub mod cli;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod fredholm;
pub mod identities;
pub mod quadrature;
pub mod resolvent;
pub mod resonances;
pub mod scattering;
pub mod semisep;
pub mod verify;

pub use coefficients::Coefficients;
pub use error::{Error, Result};
pub use num_complex::Complex64;
