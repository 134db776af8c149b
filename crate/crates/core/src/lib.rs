//! Conjugate gradient halting times for Hermitian systems perturbed by
//! Laguerre unitary ensemble (complex Wishart) noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex Hermitian matrices, norms, the 2D discrete
//!   Laplacian and a Householder/QL Hermitian eigensolver.
//! - [`dd`]: double-double arithmetic used by the extended-precision solvers.
//! - [`cg`]: the conjugate gradient iteration with residual tracking in the
//!   `l2` and `w^-1` (inverse energy) norms, and halting-time extraction.
//! - [`ensembles`]: LUE sampling in the critical scaling `alpha = floor(sqrt(4c) N^gamma)`,
//!   right-hand sides, Marchenko-Pastur quantiles and cluster spectra.
//! - [`bounds`]: closed-form rates, halting-time bounds and tail estimates.
//! - [`kernel`]: Laguerre functions, the Christoffel-Darboux correlation
//!   kernel and trace-class tail bounds.
//! - [`experiments`]: deterministic Monte Carlo sweeps, sample-mean curves,
//!   nonnegative growth fits and CSV/JSON persistence.

pub mod bounds;
pub mod cg;
pub mod dd;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod kernel;
pub mod linalg;
pub mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64;
