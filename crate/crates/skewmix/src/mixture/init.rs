//! Starting models for EM.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use super::model::{ComponentParams, DofPolicy, Family, MixtureModel};
use crate::numerics::SpdMatrix;
use crate::skewdist::{CanonicalRestrictedParams, McConfig, UnrestrictedParams};
use crate::{Error, Result};

/// How the starting model is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Seeded Lloyd clustering; per-cluster moments seed the components.
    Kmeans,
    /// Seeded restarts from random rows, best initial log-likelihood wins.
    RandomStarts,
}

const KMEANS_ITERS: usize = 25;
const KMEANS_RESEEDS: usize = 10;
const RANDOM_RESTARTS: usize = 10;
const INIT_NU: f64 = 30.0;

/// Builds a starting model for the requested family.
pub fn init_params(
    data: &DMatrix<f64>,
    g: usize,
    family: Family,
    strategy: InitStrategy,
    seed: u64,
    dof_policy: DofPolicy,
) -> Result<MixtureModel> {
    let n = data.nrows();
    if g == 0 || n < g {
        return Err(Error::InitFailed(format!("{n} rows for {g} components")));
    }
    match strategy {
        InitStrategy::Kmeans => kmeans_init(data, g, family, seed, dof_policy),
        InitStrategy::RandomStarts => random_starts_init(data, g, family, seed, dof_policy),
    }
}

fn kmeans_init(
    data: &DMatrix<f64>,
    g: usize,
    family: Family,
    seed: u64,
    dof_policy: DofPolicy,
) -> Result<MixtureModel> {
    let (n, p) = (data.nrows(), data.ncols());
    let mut rng = StdRng::seed_from_u64(seed);
    'reseed: for _ in 0..KMEANS_RESEEDS {
        // Seed centers from distinct rows.
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut centers: Vec<DVector<f64>> =
            idx[..g].iter().map(|&i| data.row(i).transpose()).collect();
        let mut assign = vec![0usize; n];
        for _ in 0..KMEANS_ITERS {
            for j in 0..n {
                let y = data.row(j).transpose();
                let mut best = (0usize, f64::INFINITY);
                for (h, c) in centers.iter().enumerate() {
                    let d = (&y - c).norm_squared();
                    if d < best.1 {
                        best = (h, d);
                    }
                }
                assign[j] = best.0;
            }
            let mut counts = vec![0usize; g];
            let mut sums = vec![DVector::<f64>::zeros(p); g];
            for j in 0..n {
                counts[assign[j]] += 1;
                sums[assign[j]] += data.row(j).transpose();
            }
            if counts.iter().any(|&c| c == 0) {
                continue 'reseed;
            }
            for h in 0..g {
                centers[h] = &sums[h] / counts[h] as f64;
            }
        }
        let mut counts = vec![0usize; g];
        for &a in &assign {
            counts[a] += 1;
        }
        // Clusters too small to carry a covariance count as failed seeds.
        if counts.iter().any(|&c| c < p + 2) {
            continue 'reseed;
        }
        return components_from_partition(data, &assign, g, family, dof_policy);
    }
    Err(Error::InitFailed(format!(
        "empty cluster after {KMEANS_RESEEDS} reseeds"
    )))
}

/// Per-cluster mean, covariance, and skewness-seeded delta.
fn components_from_partition(
    data: &DMatrix<f64>,
    assign: &[usize],
    g: usize,
    family: Family,
    dof_policy: DofPolicy,
) -> Result<MixtureModel> {
    let (n, p) = (data.nrows(), data.ncols());
    let mut weights = Vec::with_capacity(g);
    let mut components = Vec::with_capacity(g);
    for h in 0..g {
        let rows: Vec<usize> = (0..n).filter(|&j| assign[j] == h).collect();
        let m = rows.len() as f64;
        weights.push(m / n as f64);

        let mut mean = DVector::zeros(p);
        for &j in &rows {
            mean += data.row(j).transpose();
        }
        mean /= m;
        let mut cov = DMatrix::zeros(p, p);
        for &j in &rows {
            let r = data.row(j).transpose() - &mean;
            cov += &r * r.transpose();
        }
        cov /= m;
        for i in 0..p {
            cov[(i, i)] += 1e-8 * (cov.trace() / p as f64).max(1e-12);
        }
        let sigma = SpdMatrix::new(cov.clone())
            .map_err(|_| Error::InitFailed(format!("cluster {h} covariance not SPD")))?;

        // Coordinatewise sample skewness mapped into the feasible region.
        let mut delta = DVector::zeros(p);
        for k in 0..p {
            let sd = cov[(k, k)].sqrt();
            let mut m3 = 0.0;
            for &j in &rows {
                let c = data[(j, k)] - mean[k];
                m3 += c * c * c;
            }
            let skew = m3 / (m * sd * sd * sd);
            delta[k] = skew.clamp(-0.99, 0.99) * sd;
        }
        // Shrink toward zero until the skewness is feasible.
        let nu = family.is_t().then_some(INIT_NU);
        let component = loop {
            match make_component(family, mean.clone(), sigma.clone(), delta.clone(), nu) {
                Ok(c) => break c,
                Err(_) if delta.norm() > 1e-12 => delta *= 0.9,
                Err(e) => return Err(e),
            }
        };
        components.push(component);
    }
    MixtureModel::new(family, weights, components, dof_policy)
}

fn make_component(
    family: Family,
    mu: DVector<f64>,
    sigma: SpdMatrix,
    delta: DVector<f64>,
    nu: Option<f64>,
) -> Result<ComponentParams> {
    if family.is_restricted() {
        Ok(ComponentParams::Restricted(CanonicalRestrictedParams::new(
            mu, sigma, delta, nu,
        )?))
    } else {
        Ok(ComponentParams::Unrestricted(UnrestrictedParams::new(
            mu, sigma, delta, nu,
        )?))
    }
}

fn random_starts_init(
    data: &DMatrix<f64>,
    g: usize,
    family: Family,
    seed: u64,
    dof_policy: DofPolicy,
) -> Result<MixtureModel> {
    let (n, p) = (data.nrows(), data.ncols());
    let mut rng = StdRng::seed_from_u64(seed);

    // Global covariance shared by all starting components.
    let mut mean = DVector::zeros(p);
    for j in 0..n {
        mean += data.row(j).transpose();
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(p, p);
    for j in 0..n {
        let r = data.row(j).transpose() - &mean;
        cov += &r * r.transpose();
    }
    cov /= n as f64;
    for i in 0..p {
        cov[(i, i)] += 1e-8 * (cov.trace() / p as f64).max(1e-12);
    }
    let sigma =
        SpdMatrix::new(cov).map_err(|_| Error::InitFailed("global covariance not SPD".into()))?;

    let nu = family.is_t().then_some(INIT_NU);
    let mc = McConfig::default();
    let mut best: Option<(f64, MixtureModel)> = None;
    for _ in 0..RANDOM_RESTARTS {
        let mut components = Vec::with_capacity(g);
        for _ in 0..g {
            let row = rng.gen_range(0..n);
            components.push(make_component(
                family,
                data.row(row).transpose(),
                sigma.clone(),
                DVector::zeros(p),
                nu,
            )?);
        }
        let model = MixtureModel::new(family, vec![1.0 / g as f64; g], components, dof_policy)?;
        let ll = super::model::loglik(data, &model, &mc)?;
        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
            best = Some((ll, model));
        }
    }
    Ok(best.expect("at least one restart").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skewdist::{sample_restricted, Representation};
    use nalgebra::dvector;

    #[test]
    fn single_cluster_uses_full_data_moments() {
        let truth = CanonicalRestrictedParams::new(
            dvector![2.0, -1.0],
            SpdMatrix::identity(2),
            dvector![0.0, 0.0],
            None,
        )
        .unwrap();
        let data = sample_restricted(&truth, 3000, Representation::Convolution, 4)
            .unwrap()
            .rows;
        let model = init_params(&data, 1, Family::Rmsn, InitStrategy::Kmeans, 1, DofPolicy::PerComponent)
            .unwrap();
        let c = model.components()[0].as_restricted().unwrap();
        assert!((c.mu()[0] - 2.0).abs() < 0.1);
        assert!((c.mu()[1] + 1.0).abs() < 0.1);
    }

    #[test]
    fn symmetric_data_gives_small_initial_delta() {
        let truth = CanonicalRestrictedParams::new(
            dvector![0.0, 0.0],
            SpdMatrix::identity(2),
            dvector![0.0, 0.0],
            None,
        )
        .unwrap();
        let data = sample_restricted(&truth, 10_000, Representation::Convolution, 6)
            .unwrap()
            .rows;
        let model = init_params(&data, 1, Family::Rmsn, InitStrategy::Kmeans, 1, DofPolicy::PerComponent)
            .unwrap();
        let c = model.components()[0].as_restricted().unwrap();
        for k in 0..2 {
            let scale = c.sigma().matrix()[(k, k)].sqrt();
            assert!(c.delta()[k].abs() < 0.1 * scale, "delta {}", c.delta()[k]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let truth = CanonicalRestrictedParams::new(
            dvector![0.0, 3.0],
            SpdMatrix::identity(2),
            dvector![0.4, 0.0],
            None,
        )
        .unwrap();
        let data = sample_restricted(&truth, 500, Representation::Convolution, 8)
            .unwrap()
            .rows;
        for strategy in [InitStrategy::Kmeans, InitStrategy::RandomStarts] {
            let a = init_params(&data, 2, Family::Rmsn, strategy, 42, DofPolicy::PerComponent)
                .unwrap();
            let b = init_params(&data, 2, Family::Rmsn, strategy, 42, DofPolicy::PerComponent)
                .unwrap();
            assert_eq!(a, b, "{strategy:?}");
        }
    }

    #[test]
    fn too_few_rows_fail() {
        let data = DMatrix::zeros(2, 2);
        assert!(matches!(
            init_params(&data, 3, Family::Rmsn, InitStrategy::Kmeans, 1, DofPolicy::PerComponent),
            Err(Error::InitFailed(_))
        ));
    }
}
