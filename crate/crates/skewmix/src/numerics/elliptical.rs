//! Multivariate normal and t log-densities.

use nalgebra::DVector;
use statrs::function::gamma::ln_gamma;

use super::spd::SpdMatrix;
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

fn check_dims(y: &DVector<f64>, mu: &DVector<f64>, sigma: &SpdMatrix) -> Result<()> {
    if y.len() != mu.len() || y.len() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "y has {} entries, mu has {}, sigma is {}x{}",
            y.len(),
            mu.len(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// Log-density of `N_p(mu, sigma)` at `y`.
pub fn mvn_logpdf(y: &DVector<f64>, mu: &DVector<f64>, sigma: &SpdMatrix) -> Result<f64> {
    check_dims(y, mu, sigma)?;
    let p = y.len() as f64;
    let r = y - mu;
    let maha = sigma.inv_quad(&r);
    Ok(-0.5 * (p * LN_2PI + sigma.logdet() + maha))
}

/// Log-density of the p-dimensional t distribution with location `mu`,
/// scale matrix `sigma`, and `nu` degrees of freedom.
///
/// Converges to [`mvn_logpdf`] as `nu -> inf`.
pub fn mvt_logpdf(y: &DVector<f64>, mu: &DVector<f64>, sigma: &SpdMatrix, nu: f64) -> Result<f64> {
    check_dims(y, mu, sigma)?;
    if !(nu > 0.0) {
        return Err(Error::InvalidDof(nu));
    }
    let p = y.len() as f64;
    let r = y - mu;
    let maha = sigma.inv_quad(&r);
    Ok(ln_gamma(0.5 * (nu + p))
        - ln_gamma(0.5 * nu)
        - 0.5 * p * (nu * std::f64::consts::PI).ln()
        - 0.5 * sigma.logdet()
        - 0.5 * (nu + p) * (maha / nu).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn standard_normal_at_mode() {
        let v = mvn_logpdf(&dvector![0.0], &dvector![0.0], &SpdMatrix::identity(1)).unwrap();
        assert_relative_eq!(v, -0.918_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn zero_mahalanobis_leaves_only_the_constant() {
        for p in 1..=4 {
            let mu = DVector::from_fn(p, |i, _| i as f64 - 1.3);
            let v = mvn_logpdf(&mu, &mu, &SpdMatrix::identity(p)).unwrap();
            assert_relative_eq!(v, -0.5 * p as f64 * LN_2PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn correlated_bivariate_matches_hand_evaluation() {
        // Sigma = [[2,1],[1,2]]: det = 3, quadratic form at (1,1) is 2/3.
        let sigma = SpdMatrix::new(dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        let v = mvn_logpdf(&dvector![1.0, 1.0], &dvector![0.0, 0.0], &sigma).unwrap();
        let hand = -LN_2PI - 0.5 * 3.0_f64.ln() - 1.0 / 3.0;
        assert_relative_eq!(v, hand, epsilon = 1e-12);
        assert_relative_eq!(v, -2.720_516_544_076_734, epsilon = 1e-12);
    }

    #[test]
    fn cauchy_special_case() {
        let v = mvt_logpdf(
            &dvector![0.0],
            &dvector![0.0],
            &SpdMatrix::identity(1),
            1.0,
        )
        .unwrap();
        assert_relative_eq!(v, -std::f64::consts::PI.ln(), epsilon = 1e-12);
    }

    #[test]
    fn t_at_center_matches_constant() {
        let sigma = SpdMatrix::new(dmatrix![1.5, 0.2; 0.2, 0.8]).unwrap();
        let mu = dvector![0.4, -0.6];
        let nu = 6.0;
        let p = 2.0;
        let v = mvt_logpdf(&mu.clone(), &mu, &sigma, nu).unwrap();
        let expect = ln_gamma(0.5 * (nu + p))
            - ln_gamma(0.5 * nu)
            - 0.5 * p * (nu * std::f64::consts::PI).ln()
            - 0.5 * sigma.logdet();
        assert_relative_eq!(v, expect, epsilon = 1e-12);
    }

    #[test]
    fn t_converges_to_normal() {
        let sigma = SpdMatrix::new(dmatrix![2.0, 0.7; 0.7, 1.2]).unwrap();
        let mu = dvector![0.1, -0.4];
        let y = dvector![1.0, 1.5];
        let tv = mvt_logpdf(&y, &mu, &sigma, 1e6).unwrap();
        let nv = mvn_logpdf(&y, &mu, &sigma).unwrap();
        assert!((tv - nv).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = mvn_logpdf(&dvector![0.0, 1.0], &dvector![0.0], &SpdMatrix::identity(1));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let err = mvt_logpdf(&dvector![0.0], &dvector![0.0], &SpdMatrix::identity(1), -1.0);
        assert_eq!(err, Err(Error::InvalidDof(-1.0)));
    }
}
