//! Numerical kernels used by the statistical layers.
//!
//! Everything here is pure and reentrant and generic over [`Scalar`](crate::Scalar).

mod gamma;
mod incomplete;
mod quadrature;
mod root;
mod simplex;

pub use gamma::{ln_gamma_complex, ln_gamma_real};
pub use incomplete::{chi2_sf, f_sf, regularized_beta, regularized_gamma_lower, regularized_gamma_upper};
pub use num_complex::Complex;
pub use quadrature::{integrate_adaptive, integrate_real_line, DEFAULT_QUAD_TOLERANCE};
pub use root::find_root_bracketed;
pub use simplex::{minimize_simplex, OptimizerOptions, SimplexOutcome};

use thiserror::Error;

/// Failures of the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("argument outside function domain: {0}")]
    DomainError(String),
    #[error("adaptive quadrature exhausted {0} subdivisions before reaching tolerance")]
    MaxDepthExceeded(usize),
    #[error("function values at the bracket ends have the same sign")]
    NoSignChange,
    #[error("objective is not finite at the starting point")]
    NonFiniteObjective,
    #[error("iteration did not converge")]
    NoConvergence,
    #[error("invalid optimizer options: {0}")]
    InvalidOptions(String),
}
