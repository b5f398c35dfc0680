//! Log-densities and seeded sampling for the skew normal and skew t families.
//!
//! Families split by the dimension of the latent variable behind the skewing
//! mechanism: restricted (scalar latent), unrestricted (p-dimensional latent),
//! and extended (q-dimensional latent with a location shift). Densities whose
//! skewing probability needs a multivariate distribution function are backed
//! by the randomized quadrature in [`crate::numerics`] and return a standard
//! error alongside the value instead of silently approximating.

mod density;
mod params;
mod sample;
mod variants;

pub use density::{
    cfusn_logpdf, esn_logpdf, rmsn_logpdf, rmst_logpdf, sun_logpdf, umsn_logpdf, umst_logpdf,
    McConfig, McLogDensity,
};
pub use params::{
    CanonicalRestrictedParams, ExtendedParams, Representation, SampleBatch, UnrestrictedParams,
};
pub use sample::{sample_extended, sample_restricted, sample_unrestricted, shard_seed};
pub use variants::variant_logpdf;
