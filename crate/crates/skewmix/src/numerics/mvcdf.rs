//! Multivariate normal and t distribution functions for small dimensions.
//!
//! Both functions use the separation-of-variables transform to the unit cube
//! followed by a randomized Richtmyer lattice rule: a fixed number of random
//! shifts gives an unbiased estimate together with a standard error, and the
//! whole computation is deterministic for a given seed.

use nalgebra::DVector;
use rand::{rngs::StdRng, Rng, SeedableRng};

use super::scalar::{chisq_quantile, norm_cdf, norm_quantile, t_cdf};
use super::spd::SpdMatrix;
use crate::{Error, Result};

/// Dimension bound for the multivariate distribution functions.
pub const MAX_CDF_DIM: usize = 6;

const N_SHIFTS: usize = 12;
const SQRT_PRIMES: [f64; 7] = [
    1.414_213_562_373_095_1,  // sqrt 2
    1.732_050_807_568_877_2,  // sqrt 3
    2.236_067_977_499_79,     // sqrt 5
    2.645_751_311_064_590_7,  // sqrt 7
    3.316_624_790_355_399_8,  // sqrt 11
    3.605_551_275_463_989,    // sqrt 13
    4.123_105_625_617_661,    // sqrt 17
];

/// A Monte-Carlo estimate together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

fn check_input(upper: &DVector<f64>, sigma: &SpdMatrix) -> Result<usize> {
    let p = upper.len();
    if p != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "upper has {} entries, sigma is {}x{}",
            p,
            sigma.dim(),
            sigma.dim()
        )));
    }
    if p > MAX_CDF_DIM {
        return Err(Error::DimensionTooLarge {
            dim: p,
            max: MAX_CDF_DIM,
        });
    }
    Ok(p)
}

fn clamp_unit(u: f64) -> f64 {
    u.clamp(1e-15, 1.0 - 1e-15)
}

/// Estimates `P(X <= upper)` for `X ~ N_p(0, sigma)`.
///
/// Deterministic for a given seed; `p = 1` falls back to the exact scalar
/// distribution function with zero standard error.
pub fn mvn_cdf(upper: &DVector<f64>, sigma: &SpdMatrix, draws: usize, seed: u64) -> Result<McEstimate> {
    let p = check_input(upper, sigma)?;
    if p == 1 {
        let sd = sigma.matrix()[(0, 0)].sqrt();
        return Ok(McEstimate {
            value: norm_cdf(upper[0] / sd),
            se: 0.0,
        });
    }
    lattice_integrate(upper, sigma, None, draws, seed)
}

/// Estimates `P(X <= upper)` for `X ~ t_p(0, sigma, nu)`.
pub fn mvt_cdf(
    upper: &DVector<f64>,
    sigma: &SpdMatrix,
    nu: f64,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let p = check_input(upper, sigma)?;
    if !(nu > 0.0) {
        return Err(Error::InvalidDof(nu));
    }
    if p == 1 {
        let sd = sigma.matrix()[(0, 0)].sqrt();
        return Ok(McEstimate {
            value: t_cdf(upper[0] / sd, nu)?,
            se: 0.0,
        });
    }
    lattice_integrate(upper, sigma, Some(nu), draws, seed)
}

/// Shared randomized-lattice driver. `nu = None` integrates the normal
/// probability; `Some(nu)` adds the chi-square radial coordinate of the t.
fn lattice_integrate(
    upper: &DVector<f64>,
    sigma: &SpdMatrix,
    nu: Option<f64>,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    let p = upper.len();
    let l = sigma.cholesky_factor().0;
    // Cube dimension: p-1 conditioning coordinates, plus one radial coordinate
    // for the t case.
    let cube_dim = (p - 1) + usize::from(nu.is_some());
    let n_per_shift = (draws / N_SHIFTS).max(8);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut shift_means = Vec::with_capacity(N_SHIFTS);

    let mut y = vec![0.0_f64; p - 1];
    for _ in 0..N_SHIFTS {
        let delta: Vec<f64> = (0..cube_dim).map(|_| rng.gen::<f64>()).collect();
        let mut acc = 0.0_f64;
        for i in 1..=n_per_shift {
            let mut w = [0.0_f64; 8];
            for (j, d) in delta.iter().enumerate() {
                let v = (i as f64) * SQRT_PRIMES[j] + d;
                w[j] = (2.0 * v.fract() - 1.0).abs();
            }
            let (scale, offset) = match nu {
                None => (1.0, 0),
                Some(nu) => {
                    let q = chisq_quantile(clamp_unit(w[0]), nu);
                    ((q / nu).sqrt(), 1)
                }
            };
            let mut prod = norm_cdf(scale * upper[0] / l[(0, 0)]);
            let mut e = prod;
            for k in 1..p {
                let z = norm_quantile(clamp_unit(w[offset + k - 1] * e));
                y[k - 1] = z;
                let mut partial = 0.0;
                for (j, yj) in y.iter().enumerate().take(k) {
                    partial += l[(k, j)] * yj;
                }
                e = norm_cdf((scale * upper[k] - partial) / l[(k, k)]);
                prod *= e;
            }
            acc += prod;
        }
        shift_means.push(acc / n_per_shift as f64);
    }

    let mean = shift_means.iter().sum::<f64>() / N_SHIFTS as f64;
    let var = shift_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (N_SHIFTS as f64 - 1.0);
    Ok(McEstimate {
        value: mean,
        se: (var / N_SHIFTS as f64).sqrt(),
    })
}
