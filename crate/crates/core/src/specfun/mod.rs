//! Scalar special functions.

pub mod fractional;
pub mod gamma;
pub mod harmonics;
pub mod legendre;
pub mod mittag_leffler;

pub use fractional::{caputo_derivative_numeric, riemann_liouville_from_caputo};
pub use gamma::{gamma, rgamma};
pub use harmonics::{lm_index, spherical_harmonic, spherical_harmonics_upto, HarmonicIndex};
pub use legendre::{legendre_p, legendre_p_all};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_tail, MittagLefflerParams, Regime};
