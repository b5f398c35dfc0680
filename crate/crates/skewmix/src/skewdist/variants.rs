//! Literal implementations of the published restricted-family densities.
//!
//! Each variant evaluates its own formula directly, never by converting to
//! canonical form, so the parameterization-equivalence tests compare two
//! genuinely different computations.

use nalgebra::DVector;

use crate::numerics::{mvn_logpdf, mvt_logpdf, norm_logcdf, t_logcdf};
use crate::paramx::{correlation_of, scale_diag, spd_sqrt, VariantParams, VariantTag};
use crate::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Log-density of the variant's own published formula. The skew-normal or
/// skew-t form is selected by the presence of degrees of freedom.
pub fn variant_logpdf(y: &DVector<f64>, variant: &VariantParams) -> Result<f64> {
    let p = variant.mu().len();
    if y.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "point has {} entries, distribution has dimension {p}",
            y.len()
        )));
    }
    let r = y - variant.mu();
    let skew_sd = variant.skew_var().sqrt();

    // The linear form inside the univariate skewing distribution function.
    let linear = match variant.tag() {
        VariantTag::A => {
            // delta_A^T R^{-1} D^{-1} (y - mu)
            let d = scale_diag(variant.sigma());
            let scaled = r.component_div(&d);
            variant.skew().dot(&correlation_of(variant.sigma()).solve(&scaled))
        }
        VariantTag::B | VariantTag::P => variant.skew().dot(&variant.sigma().solve(&r)),
        VariantTag::G => variant.skew().dot(&r),
        VariantTag::Sni => {
            // delta_S^T sigma^{-1/2} (y - mu)
            let root = spd_sqrt(variant.sigma())?;
            variant.skew().dot(&root.solve(&r))
        }
    };

    match variant.nu() {
        None => Ok(LN_2
            + mvn_logpdf(y, variant.mu(), variant.sigma())?
            + norm_logcdf(linear / skew_sd)),
        Some(nu) => {
            let d = variant.sigma().inv_quad(&r);
            let adj = ((nu + p as f64) / (nu + d)).sqrt();
            Ok(LN_2
                + mvt_logpdf(y, variant.mu(), variant.sigma(), nu)?
                + t_logcdf(linear * adj / skew_sd, nu + p as f64)?)
        }
    }
}
