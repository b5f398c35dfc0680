//! Independent oracles used by the test suites.
//!
//! Nothing in here calls into the main library; expected values are produced
//! from first principles (quadrature, enumeration, or simulation from the
//! generative hierarchy) so the tests compare two genuinely different routes.

pub mod conditional;
pub mod gof;
pub mod perm;
pub mod quadrature;

pub use conditional::{mc_conditional_moments_rmsn, mc_conditional_moments_rmst, McMoment};
pub use gof::{
    chi2_against_density, chi2_statistic, chisq_critical, ks_two_sample, ks_two_sample_critical,
};
pub use perm::min_permutation_error;
pub use quadrature::{
    adaptive_simpson, gauss_legendre, integrate_real_line, plane_nodes, PlaneNode,
};

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

/// Plain Monte-Carlo estimate of `P(X <= upper)` for `X ~ N_p(0, sigma)`.
///
/// Deliberately the crudest possible estimator: i.i.d. draws through a
/// Cholesky factor and an indicator average, as an independent check of any
/// smarter integration scheme.
pub fn mc_mvn_cdf(upper: &DVector<f64>, sigma: &DMatrix<f64>, draws: usize, seed: u64) -> (f64, f64) {
    let p = upper.len();
    let l = sigma.clone().cholesky().expect("oracle sigma must be SPD").l();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..draws {
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &l * z;
        if (0..p).all(|i| x[i] <= upper[i]) {
            hits += 1;
        }
    }
    let est = hits as f64 / draws as f64;
    let se = (est * (1.0 - est) / draws as f64).sqrt();
    (est, se)
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
