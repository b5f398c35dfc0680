//! The EM fit loop.

use nalgebra::DMatrix;

use super::estep::{estep_rmsn, estep_rmst};
use super::init::{init_params, InitStrategy};
use super::mc_estep::{estep_umsn_mc, estep_umst_mc};
use super::model::{DofPolicy, Family, FitReport, MixtureModel};
use super::mstep::{mstep_rmsn, mstep_rmst, mstep_unrestricted, DofUpdate};
use crate::skewdist::{shard_seed, McConfig};
use crate::{Error, Result};

/// Options controlling a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative log-likelihood change below which the fit stops.
    pub tol: f64,
    pub init: InitStrategy,
    pub dof_update: DofUpdate,
    pub dof_policy: DofPolicy,
    pub seed: u64,
    /// Draw budget for Monte-Carlo E-steps and Monte-Carlo-backed densities.
    pub mc_draws: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-8,
            init: InitStrategy::Kmeans,
            dof_update: DofUpdate::Ecme,
            dof_policy: DofPolicy::PerComponent,
            seed: 0,
            mc_draws: 10_000,
        }
    }
}

/// Fits a g-component mixture of the given family by EM.
///
/// Stops when the relative log-likelihood increase drops below `tol` or
/// `max_iter` is reached; the `converged` flag records which. Reruns with the
/// same options and seed are bit-identical.
pub fn fit_em(
    data: &DMatrix<f64>,
    g: usize,
    family: Family,
    options: &FitOptions,
) -> Result<FitReport> {
    let (n, p) = (data.nrows(), data.ncols());
    if g < 1 {
        return Err(Error::InvalidOptions("g must be at least 1".into()));
    }
    if n <= g * (p + 1) {
        return Err(Error::InvalidOptions(format!(
            "{n} rows cannot support {g} components in dimension {p}"
        )));
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidOptions("tol must be positive".into()));
    }
    let model0 = init_params(data, g, family, options.init, options.seed, options.dof_policy)?;
    fit_em_from(data, &model0, options)
}

/// Runs the EM loop from an explicit starting model. Component updates are
/// index-local and the responsibility normalization sums in value order, so
/// permuting the starting components permutes the fitted components
/// identically.
pub fn fit_em_from(
    data: &DMatrix<f64>,
    model0: &MixtureModel,
    options: &FitOptions,
) -> Result<FitReport> {
    if data.ncols() != model0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, model dimension is {}",
            data.ncols(),
            model0.dim()
        )));
    }
    let family = model0.family();
    let mut model = model0.clone();
    let mc0 = McConfig {
        draws: options.mc_draws,
        seed: shard_seed(options.seed, 0),
    };
    let mut trace = vec![super::model::loglik(data, &model, &mc0)?];
    let mut converged = options.tol.is_infinite();
    let mut iterations = 0usize;

    while !converged && iterations < options.max_iter {
        iterations += 1;
        // Each iteration gets its own derived seed so Monte-Carlo E-steps and
        // density evaluations are reproducible but not frozen across
        // iterations.
        let mc = McConfig {
            draws: options.mc_draws,
            seed: shard_seed(options.seed, iterations as u64),
        };
        model = match family {
            Family::Rmsn => {
                let state = estep_rmsn(data, &model, &mc)?;
                mstep_rmsn(data, &state)?
            }
            Family::Rmst => {
                let state = estep_rmst(data, &model, &mc)?;
                mstep_rmst(data, &model, &state, options.dof_update, &mc)?
            }
            Family::Umsn => {
                let state = estep_umsn_mc(data, &model, options.mc_draws, mc.seed)?;
                mstep_unrestricted(data, &model, &state, options.dof_update, &mc)?
            }
            Family::Umst => {
                let state = estep_umst_mc(data, &model, options.mc_draws, mc.seed)?;
                mstep_unrestricted(data, &model, &state, options.dof_update, &mc)?
            }
        };
        let ll = super::model::loglik(data, &model, &mc0)?;
        let prev = *trace.last().expect("nonempty trace");
        trace.push(ll);
        if (ll - prev).abs() / (prev.abs() + 1.0) < options.tol {
            converged = true;
        }
    }

    let responsibilities = super::model::responsibilities(data, &model, &mc0)?;
    Ok(FitReport {
        model,
        loglik_trace: trace,
        iterations,
        converged,
        responsibilities,
        seed: options.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::model::ComponentParams;
    use crate::numerics::SpdMatrix;
    use crate::skewdist::{sample_restricted, CanonicalRestrictedParams, Representation};
    use nalgebra::{dvector, DVector};

    fn gaussian_data(n: usize, seed: u64) -> DMatrix<f64> {
        let truth = CanonicalRestrictedParams::new(
            dvector![0.5, -0.5],
            SpdMatrix::new(nalgebra::dmatrix![1.2, 0.3; 0.3, 0.8]).unwrap(),
            dvector![0.0, 0.0],
            None,
        )
        .unwrap();
        sample_restricted(&truth, n, Representation::Convolution, seed)
            .unwrap()
            .rows
    }

    #[test]
    fn single_gaussian_component_attains_the_analytic_mle() {
        let data = gaussian_data(2000, 5);
        let report = fit_em(
            &data,
            1,
            Family::Rmsn,
            &FitOptions {
                max_iter: 800,
                tol: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.converged, "stopped after {} iterations", report.iterations);

        // Analytic Gaussian MLE log-likelihood.
        let (n, p) = (data.nrows(), data.ncols());
        let mean = DVector::from_iterator(p, (0..p).map(|k| data.column(k).sum() / n as f64));
        let mut cov = nalgebra::DMatrix::zeros(p, p);
        for j in 0..n {
            let r = data.row(j).transpose() - &mean;
            cov += &r * r.transpose();
        }
        cov /= n as f64;
        let spd = SpdMatrix::new(cov).unwrap();
        let mut mle = 0.0;
        for j in 0..n {
            mle += crate::numerics::mvn_logpdf(&data.row(j).transpose(), &mean, &spd).unwrap();
        }
        let fitted = *report.loglik_trace.last().unwrap();
        // The skew fit nests the Gaussian, so it can only do better; it should
        // not do meaningfully worse.
        assert!(
            fitted >= mle - 1e-6,
            "fitted {fitted} vs analytic MLE {mle}"
        );
    }

    #[test]
    fn infinite_tolerance_stops_after_initialization() {
        let data = gaussian_data(300, 6);
        let report = fit_em(
            &data,
            1,
            Family::Rmsn,
            &FitOptions {
                tol: f64::INFINITY,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(report.loglik_trace.len(), 1);
        assert!(report.converged);
    }

    #[test]
    fn rerun_with_same_seed_is_identical() {
        let data = gaussian_data(400, 7);
        let options = FitOptions {
            max_iter: 20,
            ..Default::default()
        };
        let a = fit_em(&data, 2, Family::Rmsn, &options).unwrap();
        let b = fit_em(&data, 2, Family::Rmsn, &options).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loglik_trace, b.loglik_trace);
    }

    #[test]
    fn monotone_loglik_for_rmsn() {
        let truth = CanonicalRestrictedParams::new(
            dvector![0.0, 0.0],
            SpdMatrix::identity(2),
            dvector![0.7, -0.3],
            None,
        )
        .unwrap();
        let data = sample_restricted(&truth, 1500, Representation::Convolution, 11)
            .unwrap()
            .rows;
        let report = fit_em(
            &data,
            1,
            Family::Rmsn,
            &FitOptions {
                max_iter: 50,
                tol: 1e-12,
                ..Default::default()
            },
        )
        .unwrap();
        for w in report.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8, "loglik decreased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn permutation_of_initial_components_permutes_the_fit() {
        let data = {
            let a = CanonicalRestrictedParams::new(
                dvector![-2.0],
                SpdMatrix::identity(1),
                dvector![0.3],
                None,
            )
            .unwrap();
            let b = CanonicalRestrictedParams::new(
                dvector![2.0],
                SpdMatrix::identity(1),
                dvector![-0.3],
                None,
            )
            .unwrap();
            let mut rows = sample_restricted(&a, 200, Representation::Convolution, 1)
                .unwrap()
                .rows;
            let more = sample_restricted(&b, 200, Representation::Convolution, 2)
                .unwrap()
                .rows;
            rows = DMatrix::from_fn(400, 1, |j, k| {
                if j < 200 {
                    rows[(j, k)]
                } else {
                    more[(j - 200, k)]
                }
            });
            rows
        };
        let c0 = CanonicalRestrictedParams::new(
            dvector![-1.5],
            SpdMatrix::identity(1),
            dvector![0.0],
            None,
        )
        .unwrap();
        let c1 = CanonicalRestrictedParams::new(
            dvector![1.5],
            SpdMatrix::identity(1),
            dvector![0.0],
            None,
        )
        .unwrap();
        let forward = MixtureModel::new(
            Family::Rmsn,
            vec![0.4, 0.6],
            vec![
                ComponentParams::Restricted(c0.clone()),
                ComponentParams::Restricted(c1.clone()),
            ],
            DofPolicy::PerComponent,
        )
        .unwrap();
        let swapped = MixtureModel::new(
            Family::Rmsn,
            vec![0.6, 0.4],
            vec![
                ComponentParams::Restricted(c1),
                ComponentParams::Restricted(c0),
            ],
            DofPolicy::PerComponent,
        )
        .unwrap();
        let options = FitOptions {
            max_iter: 30,
            ..Default::default()
        };
        let a = fit_em_from(&data, &forward, &options).unwrap();
        let b = fit_em_from(&data, &swapped, &options).unwrap();
        assert_eq!(a.model.weights()[0], b.model.weights()[1]);
        assert_eq!(a.model.weights()[1], b.model.weights()[0]);
        assert_eq!(a.model.components()[0], b.model.components()[1]);
        assert_eq!(a.model.components()[1], b.model.components()[0]);
        assert_eq!(a.loglik_trace, b.loglik_trace);
    }
}
