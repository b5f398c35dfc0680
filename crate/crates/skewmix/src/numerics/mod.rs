//! Foundational probability and linear-algebra kernels.
//!
//! Everything here is a pure function of its inputs (seeds included), so the
//! module is safe to call concurrently from multiple threads.

mod elliptical;
mod mvcdf;
mod scalar;
mod spd;
mod truncated;

pub use elliptical::{mvn_logpdf, mvt_logpdf};
pub use mvcdf::{mvn_cdf, mvt_cdf, McEstimate, MAX_CDF_DIM};
pub use scalar::{
    norm_cdf, norm_logcdf, norm_logpdf, norm_pdf, norm_quantile, t_cdf, t_logcdf, t_logpdf,
};
pub use spd::{chol, LowerTriangularFactor, SpdMatrix};
pub use truncated::{trunc_norm_moments, trunc_t_moments, TruncMoments};

use crate::{Error, Result};

/// Overflow-safe `log(sum(exp(values)))`.
///
/// Summation runs in ascending value order, so the result does not depend on
/// the ordering of the input slice.
pub fn logsumexp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.len() == 1 {
        return Ok(values[0]);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if max.is_nan() {
        return Ok(f64::NAN);
    }
    let mut shifted: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    shifted.sort_by(|a, b| a.total_cmp(b));
    let sum: f64 = shifted.iter().sum();
    Ok(max + sum.ln())
}

/// Sum in ascending value order, independent of the input ordering.
pub(crate) fn stable_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logsumexp_single_element_is_identity() {
        assert_eq!(logsumexp(&[3.25]).unwrap(), 3.25);
        assert_eq!(logsumexp(&[-1e300]).unwrap(), -1e300);
    }

    #[test]
    fn logsumexp_matches_definition() {
        let (a, b) = (2.0_f64, 5.0_f64);
        let got = logsumexp(&[a.ln(), b.ln()]).unwrap();
        assert_relative_eq!(got, (a + b).ln(), max_relative = 1e-14);
    }

    #[test]
    fn logsumexp_is_shift_invariant() {
        let got = logsumexp(&[1000.0, 1000.0]).unwrap();
        assert_relative_eq!(got, 1000.0 + 2.0_f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn logsumexp_empty_is_an_error() {
        assert_eq!(logsumexp(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn logsumexp_order_independent() {
        let v = [0.3, -4.1, 2.2, 1.9, -0.5];
        let mut w = v;
        w.reverse();
        assert_eq!(logsumexp(&v).unwrap(), logsumexp(&w).unwrap());
    }

    #[test]
    fn logsumexp_all_neg_infinity() {
        let v = [f64::NEG_INFINITY, f64::NEG_INFINITY];
        assert_eq!(logsumexp(&v).unwrap(), f64::NEG_INFINITY);
    }
}
