//! Log-density evaluation for the restricted, unrestricted, and extended
//! families.

use nalgebra::{DMatrix, DVector};

use super::params::{CanonicalRestrictedParams, ExtendedParams, UnrestrictedParams};
use crate::numerics::{
    mvn_cdf, mvn_logpdf, mvt_cdf, mvt_logpdf, norm_logcdf, t_logcdf, SpdMatrix,
};
use crate::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Draw budget and seed for densities backed by Monte-Carlo distribution
/// functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub draws: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            draws: 10_000,
            seed: 0x5eed_cdf,
        }
    }
}

/// A log-density together with the standard error inherited from any
/// Monte-Carlo distribution-function evaluation inside it (zero on closed-form
/// paths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McLogDensity {
    pub value: f64,
    pub se: f64,
}

/// Relative standard error of a log-quantity; zero when the estimate itself
/// underflowed to zero (the log-density is then -inf and exact in the only
/// sense available).
fn rel_se(value: f64, se: f64) -> f64 {
    if value > 0.0 {
        se / value
    } else {
        0.0
    }
}

fn check_point(y: &DVector<f64>, dim: usize) -> Result<()> {
    if y.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "point has {} entries, distribution has dimension {dim}",
            y.len()
        )));
    }
    Ok(())
}

/// Restricted skew normal log-density:
/// `log 2 + log phi_p(y; mu, sigma) + log Phi(q / s)` with
/// `q = delta^T sigma^{-1} (y - mu)` and `s^2 = 1 - delta^T sigma^{-1} delta`.
pub fn rmsn_logpdf(y: &DVector<f64>, params: &CanonicalRestrictedParams) -> Result<f64> {
    if params.nu().is_some() {
        return Err(Error::InvalidOptions(
            "rmsn_logpdf takes skew-normal parameters (no degrees of freedom)".into(),
        ));
    }
    check_point(y, params.dim())?;
    let r = y - params.mu();
    let q = params.sigma_inv_delta().dot(&r);
    let s = params.skew_var().sqrt();
    Ok(LN_2 + mvn_logpdf(y, params.mu(), params.sigma())? + norm_logcdf(q / s))
}

/// Restricted skew t log-density; the skewing argument carries the
/// `sqrt((nu + p) / (nu + d(y)))` Mahalanobis adjustment and `nu + p` degrees
/// of freedom.
pub fn rmst_logpdf(y: &DVector<f64>, params: &CanonicalRestrictedParams) -> Result<f64> {
    let nu = params
        .nu()
        .ok_or_else(|| Error::InvalidOptions("rmst_logpdf needs degrees of freedom".into()))?;
    check_point(y, params.dim())?;
    let p = params.dim() as f64;
    let r = y - params.mu();
    let q = params.sigma_inv_delta().dot(&r);
    let s = params.skew_var().sqrt();
    let d = params.sigma().inv_quad(&r);
    let adj = ((nu + p) / (nu + d)).sqrt();
    Ok(LN_2
        + mvt_logpdf(y, params.mu(), params.sigma(), nu)?
        + t_logcdf(q / s * adj, nu + p)?)
}

/// Unrestricted skew normal log-density:
/// `p log 2 + log phi_p + log Phi_p(D sigma^{-1}(y - mu); 0, Lambda)`.
///
/// The orthant probability is exact for `p = 1` and Monte-Carlo otherwise.
pub fn umsn_logpdf(
    y: &DVector<f64>,
    params: &UnrestrictedParams,
    cfg: &McConfig,
) -> Result<McLogDensity> {
    if params.nu().is_some() {
        return Err(Error::InvalidOptions(
            "umsn_logpdf takes skew-normal parameters (no degrees of freedom)".into(),
        ));
    }
    check_point(y, params.dim())?;
    let p = params.dim();
    let base = mvn_logpdf(y, params.mu(), params.sigma())?;
    let arg = skew_argument(params, y);
    if p == 1 {
        let s = params.lambda().matrix()[(0, 0)].sqrt();
        return Ok(McLogDensity {
            value: LN_2 + base + norm_logcdf(arg[0] / s),
            se: 0.0,
        });
    }
    let est = mvn_cdf(&arg, params.lambda(), cfg.draws, cfg.seed)?;
    Ok(McLogDensity {
        value: p as f64 * LN_2 + base + est.value.ln(),
        se: rel_se(est.value, est.se),
    })
}

/// Unrestricted skew t log-density; converges to [`umsn_logpdf`] as
/// `nu -> inf`.
pub fn umst_logpdf(
    y: &DVector<f64>,
    params: &UnrestrictedParams,
    cfg: &McConfig,
) -> Result<McLogDensity> {
    let nu = params
        .nu()
        .ok_or_else(|| Error::InvalidOptions("umst_logpdf needs degrees of freedom".into()))?;
    check_point(y, params.dim())?;
    let p = params.dim();
    let pf = p as f64;
    let base = mvt_logpdf(y, params.mu(), params.sigma(), nu)?;
    let r = y - params.mu();
    let d = params.sigma().inv_quad(&r);
    let adj = ((nu + pf) / (nu + d)).sqrt();
    let arg = skew_argument(params, y) * adj;
    if p == 1 {
        let s = params.lambda().matrix()[(0, 0)].sqrt();
        return Ok(McLogDensity {
            value: LN_2 + base + t_logcdf(arg[0] / s, nu + 1.0)?,
            se: 0.0,
        });
    }
    let est = mvt_cdf(&arg, params.lambda(), nu + pf, cfg.draws, cfg.seed)?;
    Ok(McLogDensity {
        value: pf * LN_2 + base + est.value.ln(),
        se: rel_se(est.value, est.se),
    })
}

/// `diag(delta) sigma^{-1} (y - mu)`.
fn skew_argument(params: &UnrestrictedParams, y: &DVector<f64>) -> DVector<f64> {
    let r = y - params.mu();
    let solved = params.sigma().solve(&r);
    solved.component_mul(params.delta())
}

/// Extended skew normal log-density with scalar extension parameter `tau`:
/// the skewing probability is shifted by `tau` and renormalized by `Phi(tau)`.
pub fn esn_logpdf(
    y: &DVector<f64>,
    mu: &DVector<f64>,
    sigma: &SpdMatrix,
    delta: &DVector<f64>,
    tau: f64,
) -> Result<f64> {
    let params = CanonicalRestrictedParams::new(mu.clone(), sigma.clone(), delta.clone(), None)?;
    check_point(y, params.dim())?;
    let r = y - mu;
    let q = params.sigma_inv_delta().dot(&r);
    let s = params.skew_var().sqrt();
    Ok(mvn_logpdf(y, mu, sigma)? + norm_logcdf((tau + q) / s) - norm_logcdf(tau))
}

/// Unified skew normal log-density with a q-dimensional latent:
/// `log phi_p + log Phi_q(tau + Delta^T sigma^{-1}(y - mu); cond) -
///  log Phi_q(tau; gamma)`.
///
/// Closed form for `q = 1`; Monte-Carlo with propagated standard error for
/// `q > 1`.
pub fn sun_logpdf(y: &DVector<f64>, params: &ExtendedParams, cfg: &McConfig) -> Result<McLogDensity> {
    check_point(y, params.dim())?;
    let q = params.latent_dim();
    let base = mvn_logpdf(y, params.mu(), params.sigma())?;
    let r = y - params.mu();
    let arg = params.tau() + params.delta().transpose() * params.sigma().solve(&r);
    if q == 1 {
        let s_num = params.cond_cov().matrix()[(0, 0)].sqrt();
        let s_den = params.gamma().matrix()[(0, 0)].sqrt();
        return Ok(McLogDensity {
            value: base + norm_logcdf(arg[0] / s_num) - norm_logcdf(params.tau()[0] / s_den),
            se: 0.0,
        });
    }
    let num = mvn_cdf(&arg, params.cond_cov(), cfg.draws, cfg.seed)?;
    let den = mvn_cdf(params.tau(), params.gamma(), cfg.draws, cfg.seed.wrapping_add(1))?;
    Ok(McLogDensity {
        value: base + num.value.ln() - den.value.ln(),
        se: rel_se(num.value, num.se) + rel_se(den.value, den.se),
    })
}

/// Canonical fundamental skew normal log-density with a full `p x q` skewness
/// matrix: `q log 2 + log phi_p + log Phi_q(Delta^T sigma^{-1}(y - mu); 0,
/// I_q - Delta^T sigma^{-1} Delta)`.
pub fn cfusn_logpdf(
    y: &DVector<f64>,
    mu: &DVector<f64>,
    sigma: &SpdMatrix,
    delta: &DMatrix<f64>,
    cfg: &McConfig,
) -> Result<McLogDensity> {
    let params = ExtendedParams::cfusn(mu.clone(), sigma.clone(), delta.clone())?;
    check_point(y, params.dim())?;
    let q = params.latent_dim();
    let base = mvn_logpdf(y, mu, sigma)?;
    let r = y - mu;
    let arg = delta.transpose() * sigma.solve(&r);
    if q == 1 {
        let s = params.cond_cov().matrix()[(0, 0)].sqrt();
        return Ok(McLogDensity {
            value: LN_2 + base + norm_logcdf(arg[0] / s),
            se: 0.0,
        });
    }
    let est = mvn_cdf(&arg, params.cond_cov(), cfg.draws, cfg.seed)?;
    Ok(McLogDensity {
        value: q as f64 * LN_2 + base + est.value.ln(),
        se: rel_se(est.value, est.se),
    })
}
