//! Time-changed rotational diffusions on the unit sphere and isotropic
//! Gaussian random fields evaluated along them.
//!
//! The crate pairs every closed-form quantity (transition density series,
//! Mittag-Leffler relaxations, space-time covariances, Wigner coefficients)
//! with a Monte Carlo or quadrature oracle, and packages the comparisons as
//! reproducible validation suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diffusion;
pub mod error;
pub mod estimate;
pub mod fields;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod sphgeom;
pub mod subordinate;
pub mod wigner;

pub use error::{Error, Result};
