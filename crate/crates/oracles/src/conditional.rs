//! Monte-Carlo conditional-expectation oracles.
//!
//! The latent-variable moments behind the EM steps are estimated here by
//! importance sampling straight from the generative hierarchy: latents are
//! drawn from their priors and reweighted by the observation likelihood.
//! No posterior algebra is used, so these values are an independent check of
//! any closed-form E-step.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma, StandardNormal};

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McMoment {
    pub value: f64,
    pub se: f64,
}

/// Conditional moments of the restricted skew normal latent:
/// `E[U | y]` and `E[U^2 | y]` where `Y = mu + delta U + e`,
/// `U ~ HN(0,1)`, `e ~ N_p(0, sigma - delta delta^T)`.
pub fn mc_conditional_moments_rmsn(
    y: &DVector<f64>,
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    draws: usize,
    seed: u64,
) -> [McMoment; 2] {
    let sig_tilde = sigma - delta * delta.transpose();
    let chol = sig_tilde
        .cholesky()
        .expect("oracle requires feasible skewness");
    let r = y - mu;
    let mut rng = StdRng::seed_from_u64(seed);

    let mut log_w = Vec::with_capacity(draws);
    let mut us = Vec::with_capacity(draws);
    for _ in 0..draws {
        let u: f64 = rng.sample::<f64, _>(StandardNormal).abs();
        let resid = &r - delta * u;
        let q = resid.dot(&chol.solve(&resid));
        log_w.push(-0.5 * q);
        us.push(u);
    }
    let g1: Vec<f64> = us.clone();
    let g2: Vec<f64> = us.iter().map(|u| u * u).collect();
    [ratio_estimate(&log_w, &g1), ratio_estimate(&log_w, &g2)]
}

/// Conditional moments of the restricted skew t latents given `y`:
/// `E[log W | y]`, `E[W | y]`, `E[W U | y]`, `E[W U^2 | y]` where
/// `W ~ gamma(nu/2, nu/2)`, `U | w ~ HN(0, 1/w)`, and
/// `Y | u, w ~ N_p(mu + delta u, (sigma - delta delta^T)/w)`.
pub fn mc_conditional_moments_rmst(
    y: &DVector<f64>,
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    delta: &DVector<f64>,
    nu: f64,
    draws: usize,
    seed: u64,
) -> [McMoment; 4] {
    let p = y.len() as f64;
    let sig_tilde = sigma - delta * delta.transpose();
    let chol = sig_tilde
        .cholesky()
        .expect("oracle requires feasible skewness");
    let r = y - mu;
    let mut rng = StdRng::seed_from_u64(seed);
    let gamma = Gamma::new(0.5 * nu, 2.0 / nu).expect("nu > 0");

    let mut log_wt = Vec::with_capacity(draws);
    let mut ws = Vec::with_capacity(draws);
    let mut us = Vec::with_capacity(draws);
    for _ in 0..draws {
        let w: f64 = gamma.sample(&mut rng);
        let u = rng.sample::<f64, _>(StandardNormal).abs() / w.sqrt();
        let resid = &r - delta * u;
        let q = resid.dot(&chol.solve(&resid));
        log_wt.push(0.5 * p * w.ln() - 0.5 * w * q);
        ws.push(w);
        us.push(u);
    }
    let g1: Vec<f64> = ws.iter().map(|w| w.ln()).collect();
    let g2: Vec<f64> = ws.clone();
    let g3: Vec<f64> = ws.iter().zip(&us).map(|(w, u)| w * u).collect();
    let g4: Vec<f64> = ws.iter().zip(&us).map(|(w, u)| w * u * u).collect();
    [
        ratio_estimate(&log_wt, &g1),
        ratio_estimate(&log_wt, &g2),
        ratio_estimate(&log_wt, &g3),
        ratio_estimate(&log_wt, &g4),
    ]
}

/// Self-normalized importance-sampling estimate with the standard
/// ratio-estimator variance.
fn ratio_estimate(log_w: &[f64], g: &[f64]) -> McMoment {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|lw| (lw - max).exp()).collect();
    let sw: f64 = w.iter().sum();
    let value = w.iter().zip(g).map(|(wi, gi)| wi * gi).sum::<f64>() / sw;
    let var_num: f64 = w
        .iter()
        .zip(g)
        .map(|(wi, gi)| {
            let d = wi * (gi - value);
            d * d
        })
        .sum();
    McMoment {
        value,
        se: var_num.sqrt() / sw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn rmsn_zero_skew_recovers_half_normal_moments() {
        // With delta = 0 the latent is independent of y.
        let m = mc_conditional_moments_rmsn(
            &dvector![0.7],
            &dvector![0.0],
            &dmatrix![1.0],
            &dvector![0.0],
            200_000,
            11,
        );
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert!((m[0].value - expect).abs() < 4.0 * m[0].se);
        assert!((m[1].value - 1.0).abs() < 4.0 * m[1].se);
    }

    #[test]
    fn rmst_zero_skew_weight_matches_t_mixture_formula() {
        // delta = 0: E[W | y] = (nu + p) / (nu + d).
        let nu = 6.0;
        let y = dvector![1.5];
        let m = mc_conditional_moments_rmst(
            &y,
            &dvector![0.0],
            &dmatrix![1.0],
            &dvector![0.0],
            nu,
            400_000,
            7,
        );
        let d = 1.5 * 1.5;
        let expect = (nu + 1.0) / (nu + d);
        assert!(
            (m[1].value - expect).abs() < 4.0 * m[1].se,
            "{} vs {expect} (se {})",
            m[1].value,
            m[1].se
        );
    }
}
