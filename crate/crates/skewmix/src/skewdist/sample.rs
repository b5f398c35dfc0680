//! Seeded sampling for every family, by both stochastic representations.
//!
//! Conditioning mode draws the joint latent/observed vector and rejects on the
//! sign constraints; convolution mode adds half-normal or truncated latents to
//! independent noise. Skew-t draws realize the joint t as a gamma scale
//! mixture: one weight `W ~ gamma(nu/2, nu/2)` per draw scales the whole joint
//! normal by `1 / sqrt(W)`.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::params::{
    CanonicalRestrictedParams, ExtendedParams, Representation, SampleBatch, UnrestrictedParams,
};
use crate::numerics::{norm_cdf, norm_quantile, SpdMatrix};
use crate::{Error, Result};

/// Per-draw trial budget for rejection sampling: `100 * 2^q` expected trials,
/// where q is the number of sign constraints. Unrestricted conditioning
/// acceptance decays like `2^-p`, so a too-low budget must fail loudly rather
/// than hang.
fn rejection_budget(q: usize) -> u64 {
    100u64 << q.min(32)
}

/// Derives an independent stream seed for shard `shard` of a batch
/// (splitmix64 of the pair), so batches can be generated in seed-disjoint
/// shards.
pub fn shard_seed(seed: u64, shard: u64) -> u64 {
    let mut z = seed ^ shard.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn std_normal_vec(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// One gamma(nu/2, nu/2) scale weight, or 1 for the normal family.
fn draw_weight(rng: &mut StdRng, nu: Option<f64>) -> f64 {
    match nu {
        None => 1.0,
        Some(nu) => Gamma::new(0.5 * nu, 2.0 / nu)
            .expect("validated dof")
            .sample(rng),
    }
}

/// Samples the canonical restricted family.
pub fn sample_restricted(
    params: &CanonicalRestrictedParams,
    n: usize,
    representation: Representation,
    seed: u64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let p = params.dim();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = DMatrix::zeros(n, p);
    match representation {
        Representation::Conditioning => {
            // Joint (1+p) scale [[1, delta^T], [delta, sigma]].
            let joint = joint_scale(params.sigma(), params.delta())?;
            let l = joint.cholesky_factor().0;
            let budget = rejection_budget(1);
            for i in 0..n {
                let mut trials = 0u64;
                loop {
                    trials += 1;
                    if trials > budget {
                        return Err(Error::RejectionBudgetExceeded { trials });
                    }
                    let w = draw_weight(&mut rng, params.nu());
                    let z = std_normal_vec(&mut rng, 1 + p);
                    let x = &l * z / w.sqrt();
                    if x[0] > 0.0 {
                        for j in 0..p {
                            rows[(i, j)] = params.mu()[j] + x[j + 1];
                        }
                        break;
                    }
                }
            }
        }
        Representation::Convolution => {
            let l_tilde = params.sigma_tilde()?.cholesky_factor().0;
            for i in 0..n {
                let w = draw_weight(&mut rng, params.nu());
                let u: f64 = rng.sample::<f64, _>(StandardNormal);
                let noise = &l_tilde * std_normal_vec(&mut rng, p);
                let scale = w.sqrt();
                for j in 0..p {
                    rows[(i, j)] =
                        params.mu()[j] + (params.delta()[j] * u.abs() + noise[j]) / scale;
                }
            }
        }
    }
    Ok(SampleBatch {
        rows,
        seed,
        representation,
    })
}

/// Samples the unrestricted family (p sign constraints in conditioning mode).
pub fn sample_unrestricted(
    params: &UnrestrictedParams,
    n: usize,
    representation: Representation,
    seed: u64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let p = params.dim();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = DMatrix::zeros(n, p);
    match representation {
        Representation::Conditioning => {
            let joint = joint_scale_unrestricted(params)?;
            let l = joint.cholesky_factor().0;
            let budget = rejection_budget(p);
            for i in 0..n {
                let mut trials = 0u64;
                loop {
                    trials += 1;
                    if trials > budget {
                        return Err(Error::RejectionBudgetExceeded { trials });
                    }
                    let w = draw_weight(&mut rng, params.nu());
                    let z = std_normal_vec(&mut rng, 2 * p);
                    let x = &l * z / w.sqrt();
                    if (0..p).all(|j| x[j] > 0.0) {
                        for j in 0..p {
                            rows[(i, j)] = params.mu()[j] + x[p + j];
                        }
                        break;
                    }
                }
            }
        }
        Representation::Convolution => {
            let l_tilde = params.sigma_tilde()?.cholesky_factor().0;
            for i in 0..n {
                let w = draw_weight(&mut rng, params.nu());
                let u = std_normal_vec(&mut rng, p);
                let noise = &l_tilde * std_normal_vec(&mut rng, p);
                let scale = w.sqrt();
                for j in 0..p {
                    rows[(i, j)] = params.mu()[j]
                        + (params.delta()[j] * u[j].abs() + noise[j]) / scale;
                }
            }
        }
    }
    Ok(SampleBatch {
        rows,
        seed,
        representation,
    })
}

/// Samples the extended family (skew normal only: SUN, and CFUSN/ESN as
/// special cases).
pub fn sample_extended(
    params: &ExtendedParams,
    n: usize,
    representation: Representation,
    seed: u64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let p = params.dim();
    let q = params.latent_dim();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = DMatrix::zeros(n, p);
    match representation {
        Representation::Conditioning => {
            let joint = joint_scale_extended(params)?;
            let l = joint.cholesky_factor().0;
            let budget = rejection_budget(q);
            for i in 0..n {
                let mut trials = 0u64;
                loop {
                    trials += 1;
                    if trials > budget {
                        return Err(Error::RejectionBudgetExceeded { trials });
                    }
                    let z = std_normal_vec(&mut rng, q + p);
                    let x = &l * z;
                    if (0..q).all(|j| params.tau()[j] + x[j] > 0.0) {
                        for j in 0..p {
                            rows[(i, j)] = params.mu()[j] + x[q + j];
                        }
                        break;
                    }
                }
            }
        }
        Representation::Convolution => {
            // Regression decomposition of the joint law: given the truncated
            // latent T ~ TN_q(tau, gamma; > 0),
            // Y = mu + delta gamma^{-1} (T - tau) + E with
            // E ~ N_p(0, sigma - delta gamma^{-1} delta^T).
            let gamma_inv_delta_t = params.gamma().solve_matrix(&params.delta().transpose());
            let coeff = gamma_inv_delta_t.transpose();
            let resid = params.sigma().matrix() - params.delta() * &gamma_inv_delta_t;
            let resid = SpdMatrix::new(0.5 * (&resid + resid.transpose()))?;
            let l_resid = resid.cholesky_factor().0;
            let l_gamma = params.gamma().cholesky_factor().0;
            let budget = rejection_budget(q);
            for i in 0..n {
                let t = truncated_normal_latent(
                    &mut rng,
                    params.tau(),
                    &l_gamma,
                    params.gamma(),
                    budget,
                )?;
                let noise = &l_resid * std_normal_vec(&mut rng, p);
                let shift = &coeff * (&t - params.tau());
                for j in 0..p {
                    rows[(i, j)] = params.mu()[j] + shift[j] + noise[j];
                }
            }
        }
    }
    Ok(SampleBatch {
        rows,
        seed,
        representation,
    })
}

/// One draw of `N_q(tau, gamma)` conditioned componentwise positive:
/// inverse-CDF for q = 1, rejection for q > 1.
fn truncated_normal_latent(
    rng: &mut StdRng,
    tau: &DVector<f64>,
    l_gamma: &DMatrix<f64>,
    gamma: &SpdMatrix,
    budget: u64,
) -> Result<DVector<f64>> {
    let q = tau.len();
    if q == 1 {
        let sd = gamma.matrix()[(0, 0)].sqrt();
        let lower = norm_cdf(-tau[0] / sd);
        let u: f64 = rng.gen();
        let pr = (lower + u * (1.0 - lower)).clamp(1e-300, 1.0 - 1e-16);
        return Ok(DVector::from_element(1, tau[0] + sd * norm_quantile(pr)));
    }
    let mut trials = 0u64;
    loop {
        trials += 1;
        if trials > budget {
            return Err(Error::RejectionBudgetExceeded { trials });
        }
        let t = tau + l_gamma * std_normal_vec(rng, q);
        if (0..q).all(|j| t[j] > 0.0) {
            return Ok(t);
        }
    }
}

/// `[[1, delta^T], [delta, sigma]]`.
fn joint_scale(sigma: &SpdMatrix, delta: &DVector<f64>) -> Result<SpdMatrix> {
    let p = delta.len();
    let mut m = DMatrix::zeros(1 + p, 1 + p);
    m[(0, 0)] = 1.0;
    for i in 0..p {
        m[(0, i + 1)] = delta[i];
        m[(i + 1, 0)] = delta[i];
        for j in 0..p {
            m[(i + 1, j + 1)] = sigma.matrix()[(i, j)];
        }
    }
    SpdMatrix::new(m).map_err(|_| Error::InfeasibleSkewness("joint scale is not SPD".into()))
}

/// `[[I_p, D], [D, sigma]]` with `D = diag(delta)`.
fn joint_scale_unrestricted(params: &UnrestrictedParams) -> Result<SpdMatrix> {
    let p = params.dim();
    let mut m = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        m[(i, i)] = 1.0;
        m[(i, p + i)] = params.delta()[i];
        m[(p + i, i)] = params.delta()[i];
        for j in 0..p {
            m[(p + i, p + j)] = params.sigma().matrix()[(i, j)];
        }
    }
    SpdMatrix::new(m).map_err(|_| Error::InfeasibleSkewness("joint scale is not SPD".into()))
}

/// `[[gamma, delta^T], [delta, sigma]]` (centered; tau handled by the caller).
fn joint_scale_extended(params: &ExtendedParams) -> Result<SpdMatrix> {
    let p = params.dim();
    let q = params.latent_dim();
    let mut m = DMatrix::zeros(q + p, q + p);
    for i in 0..q {
        for j in 0..q {
            m[(i, j)] = params.gamma().matrix()[(i, j)];
        }
        for j in 0..p {
            m[(i, q + j)] = params.delta()[(j, i)];
            m[(q + j, i)] = params.delta()[(j, i)];
        }
    }
    for i in 0..p {
        for j in 0..p {
            m[(q + i, q + j)] = params.sigma().matrix()[(i, j)];
        }
    }
    SpdMatrix::new(m).map_err(|_| Error::InfeasibleSkewness("joint scale is not SPD".into()))
}
