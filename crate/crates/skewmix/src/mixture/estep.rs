//! Closed-form E-steps for the restricted families.
//!
//! The convolution hierarchy behind a restricted component is
//! `Y = mu + delta U + e` with `U` half-normal (scaled by `1/sqrt(W)` in the
//! t case) and `e` Gaussian noise with scale `sigma - delta delta^T`. Given
//! `y`, the latent posterior factorizes through
//! `m = delta^T sigma^{-1}(y - mu)`, `s^2 = 1 - delta^T sigma^{-1} delta`,
//! and the Mahalanobis distance `d(y)`; the conditional moments below follow
//! by completing the square and integrating gamma-tilted normal tails.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::{digamma, ln_gamma};

use super::model::{Family, MixtureModel};
use crate::numerics::{t_cdf, trunc_norm_moments};
use crate::skewdist::{CanonicalRestrictedParams, McConfig};
use crate::{Error, Result};

/// Latent-moment matrices produced by an E-step. All matrices are `n x g`
/// unless stated otherwise.
#[derive(Debug, Clone)]
pub enum LatentMoments {
    /// Skew-normal case: first and second moments of the half-normal latent.
    RestrictedNormal { e1: DMatrix<f64>, e2: DMatrix<f64> },
    /// Skew-t case: `E[log W]`, `E[W]`, `E[W U]`, `E[W U^2]`.
    RestrictedT {
        e1: DMatrix<f64>,
        e2: DMatrix<f64>,
        e3: DMatrix<f64>,
        e4: DMatrix<f64>,
    },
    /// Unrestricted skew-normal case: per component, `E[U]` rows (`n x p`)
    /// and per row `E[U U^T]` (`p x p`).
    UnrestrictedNormal {
        eu: Vec<DMatrix<f64>>,
        euu: Vec<Vec<DMatrix<f64>>>,
        ess: DMatrix<f64>,
    },
    /// Unrestricted skew-t case: scalar moments are `n x g`; `e3[h]` is
    /// `n x p` and `e4[h][j]` is `p x p`.
    UnrestrictedT {
        e1: DMatrix<f64>,
        e2: DMatrix<f64>,
        e3: Vec<DMatrix<f64>>,
        e4: Vec<Vec<DMatrix<f64>>>,
        ess: DMatrix<f64>,
        se2: DMatrix<f64>,
    },
}

/// Responsibilities plus the latent moments the M-step needs.
#[derive(Debug, Clone)]
pub struct EStepState {
    pub z: DMatrix<f64>,
    pub moments: LatentMoments,
}

/// E-step for a restricted skew-normal mixture: the latent posterior
/// `U | y` is `N(m, s^2)` truncated positive, so its first two moments come
/// straight from the truncated-normal formulas.
pub fn estep_rmsn(data: &DMatrix<f64>, model: &MixtureModel, mc: &McConfig) -> Result<EStepState> {
    if model.family() != Family::Rmsn {
        return Err(Error::InvalidOptions("estep_rmsn needs an rmsn model".into()));
    }
    let z = super::model::responsibilities(data, model, mc)?;
    let (n, g) = (data.nrows(), model.n_components());
    let mut e1 = DMatrix::zeros(n, g);
    let mut e2 = DMatrix::zeros(n, g);
    for h in 0..g {
        let params = model.components()[h].as_restricted().expect("validated");
        let s2 = params.skew_var();
        for j in 0..n {
            let y = data.row(j).transpose();
            let r = &y - params.mu();
            let m = params.sigma_inv_delta().dot(&r);
            let tm = trunc_norm_moments(m, s2)?;
            e1[(j, h)] = tm.m1;
            e2[(j, h)] = tm.m2;
        }
    }
    Ok(EStepState {
        z,
        moments: LatentMoments::RestrictedNormal { e1, e2 },
    })
}

/// Conditional skew-t latent moments for one component at one point.
///
/// With `a = (nu+p)/2`, `b = (nu+d)/2`, `c = m/s`, the posterior of `W` is a
/// gamma tilted by `Phi(c sqrt(w))`, which integrates to t distribution
/// functions:
///
/// * `E[W | y]   = (a/b) T_{2a+2}(c sqrt((a+1)/b)) / T_{2a}(c sqrt(a/b))`
/// * `E[WU | y]  = m E[W|y] + s J`, `J` a gamma-ratio correction
/// * `E[WU^2|y]  = s^2 + m E[WU|y]`
/// * `E[log W|y] = psi(a) - log b + d/da log T_{2a}(c sqrt(a/b))`,
///   the last derivative evaluated numerically.
pub(crate) struct RmstMoments {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

pub(crate) fn rmst_conditional_moments(
    params: &CanonicalRestrictedParams,
    y: &DVector<f64>,
) -> Result<RmstMoments> {
    let nu = params.nu().ok_or(Error::InvalidDof(f64::NAN))?;
    let p = params.dim() as f64;
    let r = y - params.mu();
    let m = params.sigma_inv_delta().dot(&r);
    let s2 = params.skew_var();
    let s = s2.sqrt();
    let d = params.sigma().inv_quad(&r);

    let a = 0.5 * (nu + p);
    let b = 0.5 * (nu + d);
    let c = m / s;

    let t0 = t_cdf(c * (a / b).sqrt(), 2.0 * a)?;
    let t2 = t_cdf(c * ((a + 1.0) / b).sqrt(), 2.0 * a + 2.0)?;
    let e2 = (a / b) * t2 / t0;

    // J = Gamma(a+1/2) / (sqrt(2 pi) (b + c^2/2)^(a+1/2)) / (Gamma(a) b^-a T0)
    let log_j = ln_gamma(a + 0.5) - ln_gamma(a) - 0.5 * (2.0 * std::f64::consts::PI).ln()
        - (a + 0.5) * (b + 0.5 * c * c).ln()
        + a * b.ln()
        - t0.ln();
    let e3 = m * e2 + s * log_j.exp();
    let e4 = s2 + m * e3;

    // Central difference in the shape parameter for the log-T term; the step
    // is large enough to dominate the distribution function's own error.
    let h = 1e-5 * a.max(1.0);
    let f = |aa: f64| -> Result<f64> { Ok(t_cdf(c * (aa / b).sqrt(), 2.0 * aa)?.ln()) };
    let dlogt = (f(a + h)? - f(a - h)?) / (2.0 * h);
    let e1 = digamma(a) - b.ln() + dlogt;

    Ok(RmstMoments { e1, e2, e3, e4 })
}

/// E-step for a restricted skew-t mixture.
pub fn estep_rmst(data: &DMatrix<f64>, model: &MixtureModel, mc: &McConfig) -> Result<EStepState> {
    if model.family() != Family::Rmst {
        return Err(Error::InvalidOptions("estep_rmst needs an rmst model".into()));
    }
    let z = super::model::responsibilities(data, model, mc)?;
    let (n, g) = (data.nrows(), model.n_components());
    let mut e1 = DMatrix::zeros(n, g);
    let mut e2 = DMatrix::zeros(n, g);
    let mut e3 = DMatrix::zeros(n, g);
    let mut e4 = DMatrix::zeros(n, g);
    for h in 0..g {
        let params = model.components()[h].as_restricted().expect("validated");
        for j in 0..n {
            let y = data.row(j).transpose();
            let m = rmst_conditional_moments(params, &y)?;
            e1[(j, h)] = m.e1;
            e2[(j, h)] = m.e2;
            e3[(j, h)] = m.e3;
            e4[(j, h)] = m.e4;
        }
    }
    Ok(EStepState {
        z,
        moments: LatentMoments::RestrictedT { e1, e2, e3, e4 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::model::{ComponentParams, DofPolicy};
    use crate::numerics::SpdMatrix;
    use nalgebra::dvector;

    fn one_component(delta: DVector<f64>, nu: Option<f64>) -> MixtureModel {
        let p = delta.len();
        let family = if nu.is_some() { Family::Rmst } else { Family::Rmsn };
        MixtureModel::new(
            family,
            vec![1.0],
            vec![ComponentParams::Restricted(
                CanonicalRestrictedParams::new(
                    DVector::zeros(p),
                    SpdMatrix::identity(p),
                    delta,
                    nu,
                )
                .unwrap(),
            )],
            DofPolicy::PerComponent,
        )
        .unwrap()
    }

    #[test]
    fn rmsn_zero_skew_gives_constant_half_normal_moments() {
        let model = one_component(dvector![0.0, 0.0], None);
        let data = DMatrix::from_row_slice(3, 2, &[0.1, -0.5, 2.0, 1.0, -1.0, 0.3]);
        let state = estep_rmsn(&data, &model, &McConfig::default()).unwrap();
        let LatentMoments::RestrictedNormal { e1, e2 } = &state.moments else {
            panic!("wrong variant")
        };
        let hn = (2.0 / std::f64::consts::PI).sqrt();
        for j in 0..3 {
            assert!((e1[(j, 0)] - hn).abs() < 1e-12);
            assert!((e2[(j, 0)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rmsn_second_moment_dominates_first_squared() {
        let model = one_component(dvector![0.6, -0.2], None);
        let data = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.5, -0.5, -2.0, 1.0, 3.0, 3.0]);
        let state = estep_rmsn(&data, &model, &McConfig::default()).unwrap();
        let LatentMoments::RestrictedNormal { e1, e2 } = &state.moments else {
            panic!("wrong variant")
        };
        for j in 0..4 {
            assert!(e2[(j, 0)] >= e1[(j, 0)] * e1[(j, 0)]);
        }
    }

    #[test]
    fn rmst_zero_skew_weight_is_classical_t_weight() {
        let nu = 7.0;
        let model = one_component(dvector![0.0], Some(nu));
        let data = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, -2.5]);
        let state = estep_rmst(&data, &model, &McConfig::default()).unwrap();
        let LatentMoments::RestrictedT { e2, e4, .. } = &state.moments else {
            panic!("wrong variant")
        };
        for j in 0..3 {
            let d = data[(j, 0)] * data[(j, 0)];
            let expect = (nu + 1.0) / (nu + d);
            assert!(
                (e2[(j, 0)] - expect).abs() < 1e-10,
                "{} vs {expect}",
                e2[(j, 0)]
            );
            // delta = 0: e4 = s^2 = 1.
            assert!((e4[(j, 0)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rmst_cauchy_schwarz_between_moments() {
        let model = one_component(dvector![0.5, 0.3], Some(4.0));
        let data = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 2.0, -1.0, -1.5, 0.5, 4.0, 4.0]);
        let state = estep_rmst(&data, &model, &McConfig::default()).unwrap();
        let LatentMoments::RestrictedT { e2, e3, e4, .. } = &state.moments else {
            panic!("wrong variant")
        };
        for j in 0..4 {
            assert!(e4[(j, 0)] * e2[(j, 0)] >= e3[(j, 0)] * e3[(j, 0)] - 1e-12);
        }
    }

    #[test]
    fn rmst_large_dof_approaches_rmsn_moments() {
        let delta = dvector![0.6];
        let model_t = one_component(delta.clone(), Some(1e6));
        let model_n = one_component(delta, None);
        let data = DMatrix::from_column_slice(3, 1, &[-1.0, 0.2, 1.8]);
        let mc = McConfig::default();
        let st = estep_rmst(&data, &model_t, &mc).unwrap();
        let sn = estep_rmsn(&data, &model_n, &mc).unwrap();
        let LatentMoments::RestrictedT { e2, e3, .. } = &st.moments else {
            panic!()
        };
        let LatentMoments::RestrictedNormal { e1: n1, .. } = &sn.moments else {
            panic!()
        };
        for j in 0..3 {
            assert!((e2[(j, 0)] - 1.0).abs() < 1e-3);
            // e3/e2 approaches the skew-normal latent mean.
            assert!((e3[(j, 0)] / e2[(j, 0)] - n1[(j, 0)]).abs() < 1e-3);
        }
    }
}
