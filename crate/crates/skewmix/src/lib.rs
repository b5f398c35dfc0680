//! Multivariate skew normal and skew t distributions.
//!
//! The crate covers four layers:
//!
//! * [`numerics`] — SPD factorizations, elliptical log-densities, scalar and
//!   low-dimensional multivariate distribution functions, and truncated-variable
//!   moments. Everything downstream is built on these kernels.
//! * [`paramx`] — conversions among the published parameterizations of the
//!   restricted family and between conditioning- and convolution-type parameters.
//! * [`skewdist`] — log-density evaluation and seeded sampling for the restricted,
//!   unrestricted, and extended (ESN / SUN / CFUSN) families.
//! * [`mixture`] — finite mixtures of the restricted and unrestricted families
//!   fitted by EM, with closed-form E-steps for the restricted case and a
//!   Monte-Carlo E-step for the unrestricted case.
//!
//! All densities are computed and exposed in log space; samplers take explicit
//! seeds and are reproducible.

pub mod error;
pub mod mixture;
pub mod numerics;
pub mod paramx;
pub mod skewdist;

pub use error::{Error, Result};
