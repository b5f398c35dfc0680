//! First and second moments of normal and t variables conditioned positive.

 

use super::scalar::{t_cdf, t_logpdf};
use crate::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// First two conditional moments `E[X | X > 0]` and `E[X^2 | X > 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncMoments {
    pub m1: f64,
    pub m2: f64,
}

/// Inverse Mills ratio `phi(a) / (1 - Phi(a))`, stable for any argument.
fn inv_mills(a: f64) -> f64 {
    if a < 26.0 {
        let phi = (-0.5 * a * a).exp() / SQRT_2PI;
        let tail = 0.5 * libm::erfc(a * std::f64::consts::FRAC_1_SQRT_2);
        phi / tail
    } else {
        // lambda(a) ~ a / (1 - 1/a^2 + 3/a^4 - 15/a^6 + 105/a^8 - ...)
        let r = 1.0 / (a * a);
        let denom = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 - 945.0 * r))));
        a / denom
    }
}

/// Moments of `X ~ N(mu, var)` conditioned on `X > 0`.
///
/// Mills-ratio closed forms; the conditional variance is clamped at zero so
/// `m2 >= m1^2` holds structurally even when the truncation is extreme.
pub fn trunc_norm_moments(mu: f64, var: f64) -> Result<TruncMoments> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::InvalidVariance(var));
    }
    let sd = var.sqrt();
    let alpha = -mu / sd;
    let lambda = inv_mills(alpha);
    let m1 = mu + sd * lambda;
    let cond_var = (var * (1.0 + alpha * lambda - lambda * lambda)).max(0.0);
    Ok(TruncMoments {
        m1,
        m2: m1 * m1 + cond_var,
    })
}

/// Moments of a t variable with location `mu`, squared scale `var`, and `nu`
/// degrees of freedom, conditioned positive.
///
/// The second moment needs `nu > 2` (the first needs `nu > 1`); below that the
/// requested moment does not exist and `MomentUndefined` is returned.
pub fn trunc_t_moments(mu: f64, var: f64, nu: f64) -> Result<TruncMoments> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::InvalidVariance(var));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidDof(nu));
    }
    if nu <= 2.0 {
        return Err(Error::MomentUndefined { nu, required: 2.0 });
    }
    let sd = var.sqrt();
    let alpha = -mu / sd;
    let tail = 1.0 - t_cdf(alpha, nu)?;
    if tail <= 0.0 {
        return Err(Error::InvalidVariance(tail));
    }
    let pdf_a = t_logpdf(alpha, nu)?.exp();
    // E[T | T > alpha] and E[T^2 | T > alpha] for standard t.
    let et = pdf_a * (nu + alpha * alpha) / ((nu - 1.0) * tail);
    let shrunk = alpha * ((nu - 2.0) / nu).sqrt();
    let et2 = (nu / (nu - 2.0) * (1.0 - t_cdf(shrunk, nu - 2.0)?)
        + alpha * pdf_a * (nu + alpha * alpha) / (nu - 1.0))
        / tail;
    let m1 = mu + sd * et;
    let cond_var = (var * (et2 - et * et)).max(0.0);
    Ok(TruncMoments {
        m1,
        m2: m1 * m1 + cond_var,
    })
}
