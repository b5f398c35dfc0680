//! Sampler correctness: the two stochastic representations must agree with
//! each other and with the densities they claim to follow.

use nalgebra::{dmatrix, dvector, DMatrix};
use oracles::{chi2_against_density, chisq_critical, ks_two_sample, ks_two_sample_critical};
use skewmix::numerics::SpdMatrix;
use skewmix::skewdist::{
    esn_logpdf, rmsn_logpdf, rmst_logpdf, sample_extended, sample_restricted,
    sample_unrestricted, CanonicalRestrictedParams, ExtendedParams, Representation, SampleBatch,
    UnrestrictedParams,
};

fn column(batch: &SampleBatch, k: usize) -> Vec<f64> {
    batch.rows.column(k).iter().copied().collect()
}

fn assert_ks_close(a: &SampleBatch, b: &SampleBatch, label: &str) {
    let n = a.rows.nrows();
    let crit = ks_two_sample_critical(n, n, 0.01);
    for k in 0..a.rows.ncols() {
        let stat = ks_two_sample(&column(a, k), &column(b, k));
        assert!(
            stat < crit,
            "{label} coordinate {k}: KS {stat:.5} >= critical {crit:.5}"
        );
    }
}

#[test]
fn restricted_representations_agree() {
    let n = 10_000;
    let sigma = SpdMatrix::new(dmatrix![1.2, 0.4; 0.4, 0.9]).unwrap();
    let mu = dvector![0.5, -1.0];
    let delta = dvector![0.6, -0.4];

    let sn = CanonicalRestrictedParams::new(mu.clone(), sigma.clone(), delta.clone(), None).unwrap();
    let a = sample_restricted(&sn, n, Representation::Conditioning, 101).unwrap();
    let b = sample_restricted(&sn, n, Representation::Convolution, 202).unwrap();
    assert_ks_close(&a, &b, "rmsn");

    let st = CanonicalRestrictedParams::new(mu, sigma, delta, Some(5.0)).unwrap();
    let a = sample_restricted(&st, n, Representation::Conditioning, 303).unwrap();
    let b = sample_restricted(&st, n, Representation::Convolution, 404).unwrap();
    assert_ks_close(&a, &b, "rmst");
}

#[test]
fn unrestricted_representations_agree() {
    let n = 10_000;
    let sigma = SpdMatrix::new(dmatrix![1.0, 0.3; 0.3, 1.1]).unwrap();
    let params = UnrestrictedParams::new(
        dvector![0.0, 0.4],
        sigma,
        dvector![0.55, -0.45],
        None,
    )
    .unwrap();
    let a = sample_unrestricted(&params, n, Representation::Conditioning, 55).unwrap();
    let b = sample_unrestricted(&params, n, Representation::Convolution, 66).unwrap();
    assert_ks_close(&a, &b, "umsn");
}

#[test]
fn extended_representations_agree() {
    let n = 10_000;
    let params = ExtendedParams::new(
        dvector![0.2, -0.2],
        SpdMatrix::new(dmatrix![1.0, 0.25; 0.25, 0.8]).unwrap(),
        dmatrix![0.5, 0.1; -0.15, 0.4],
        SpdMatrix::new(dmatrix![1.0, 0.2; 0.2, 1.0]).unwrap(),
        dvector![0.3, 0.5],
    )
    .unwrap();
    let a = sample_extended(&params, n, Representation::Conditioning, 77).unwrap();
    let b = sample_extended(&params, n, Representation::Convolution, 88).unwrap();
    assert_ks_close(&a, &b, "sun");
}

/// The marginal of a coordinate of a restricted draw is the scalar restricted
/// law with the matching entries, because the convolution representation acts
/// coordinatewise.
#[test]
fn restricted_samples_match_marginal_density() {
    let n = 100_000;
    let sigma = SpdMatrix::new(dmatrix![1.2, 0.4; 0.4, 0.9]).unwrap();
    let mu = dvector![0.5, -1.0];
    let delta = dvector![0.6, -0.4];
    for nu in [None, Some(5.0)] {
        let params =
            CanonicalRestrictedParams::new(mu.clone(), sigma.clone(), delta.clone(), nu).unwrap();
        for repr in [Representation::Conditioning, Representation::Convolution] {
            let batch = sample_restricted(&params, n, repr, 7).unwrap();
            for k in 0..2 {
                let marginal = CanonicalRestrictedParams::new(
                    dvector![mu[k]],
                    SpdMatrix::scalar(sigma.matrix()[(k, k)]).unwrap(),
                    dvector![delta[k]],
                    nu,
                )
                .unwrap();
                let pdf = |x: f64| {
                    let y = dvector![x];
                    match nu {
                        None => rmsn_logpdf(&y, &marginal).unwrap().exp(),
                        Some(_) => rmst_logpdf(&y, &marginal).unwrap().exp(),
                    }
                };
                let (stat, dof) = chi2_against_density(&column(&batch, k), &pdf, 50);
                let crit = chisq_critical(dof, 0.01);
                assert!(
                    stat < crit,
                    "nu {nu:?} {repr:?} coord {k}: chi2 {stat:.1} >= {crit:.1} ({dof} dof)"
                );
            }
        }
    }
}

/// Unrestricted marginals reduce to the scalar restricted law as well: the
/// latent vector acts coordinatewise through the diagonal skewness matrix.
#[test]
fn unrestricted_samples_match_marginal_density() {
    let n = 100_000;
    let sigma = SpdMatrix::new(dmatrix![1.0, 0.3; 0.3, 1.1]).unwrap();
    let mu = dvector![0.0, 0.4];
    let delta = dvector![0.55, -0.45];
    for nu in [None, Some(6.0)] {
        let params =
            UnrestrictedParams::new(mu.clone(), sigma.clone(), delta.clone(), nu).unwrap();
        for repr in [Representation::Conditioning, Representation::Convolution] {
            let batch = sample_unrestricted(&params, n, repr, 13).unwrap();
            for k in 0..2 {
                let marginal = CanonicalRestrictedParams::new(
                    dvector![mu[k]],
                    SpdMatrix::scalar(sigma.matrix()[(k, k)]).unwrap(),
                    dvector![delta[k]],
                    nu,
                )
                .unwrap();
                let pdf = |x: f64| {
                    let y = dvector![x];
                    match nu {
                        None => rmsn_logpdf(&y, &marginal).unwrap().exp(),
                        Some(_) => rmst_logpdf(&y, &marginal).unwrap().exp(),
                    }
                };
                let (stat, dof) = chi2_against_density(&column(&batch, k), &pdf, 50);
                let crit = chisq_critical(dof, 0.01);
                assert!(
                    stat < crit,
                    "nu {nu:?} {repr:?} coord {k}: chi2 {stat:.1} >= {crit:.1}"
                );
            }
        }
    }
}

/// ESN marginals of an extended draw follow the scalar extended density with
/// sliced parameters.
#[test]
fn extended_samples_match_scalar_extended_density() {
    let n = 100_000;
    let mu = dvector![0.1];
    let sigma = SpdMatrix::scalar(1.3).unwrap();
    let delta = dvector![0.7];
    let tau = 0.6;
    let params = ExtendedParams::new(
        mu.clone(),
        sigma.clone(),
        DMatrix::from_element(1, 1, delta[0]),
        SpdMatrix::identity(1),
        dvector![tau],
    )
    .unwrap();
    for repr in [Representation::Conditioning, Representation::Convolution] {
        let batch = sample_extended(&params, n, repr, 31).unwrap();
        let pdf = |x: f64| {
            esn_logpdf(&dvector![x], &mu, &sigma, &delta, tau)
                .unwrap()
                .exp()
        };
        let (stat, dof) = chi2_against_density(&column(&batch, 0), &pdf, 50);
        let crit = chisq_critical(dof, 0.01);
        assert!(stat < crit, "{repr:?}: chi2 {stat:.1} >= {crit:.1}");
    }
}

/// The CFUSN density with a full skewness matrix is checked against its own
/// sampler through the first coordinate's histogram: the marginal is itself a
/// one-row CFUSN.
#[test]
fn cfusn_full_matrix_sampler_density_agreement() {
    use skewmix::skewdist::{cfusn_logpdf, McConfig};
    let n = 100_000;
    let mu = dvector![0.0, 0.0];
    let sigma = SpdMatrix::new(dmatrix![1.0, 0.2; 0.2, 0.9]).unwrap();
    let delta = dmatrix![0.5, 0.3; -0.2, 0.4];
    let params = ExtendedParams::cfusn(mu.clone(), sigma.clone(), delta.clone()).unwrap();
    let batch = sample_extended(&params, n, Representation::Convolution, 47).unwrap();

    // Marginal of coordinate 0: p = 1 slice keeps that row of the skewness
    // matrix (q = 2 latent).
    let mu0 = dvector![0.0];
    let sigma0 = SpdMatrix::scalar(sigma.matrix()[(0, 0)]).unwrap();
    let delta0 = DMatrix::from_row_slice(1, 2, &[delta[(0, 0)], delta[(0, 1)]]);
    let pdf = |x: f64| {
        let cfg = McConfig {
            draws: 8192,
            seed: (x.to_bits() >> 3) ^ 0xC0FFEE,
        };
        cfusn_logpdf(&dvector![x], &mu0, &sigma0, &delta0, &cfg)
            .unwrap()
            .value
            .exp()
    };
    let (stat, dof) = chi2_against_density(&column(&batch, 0), &pdf, 50);
    let crit = chisq_critical(dof, 0.01);
    assert!(stat < crit, "chi2 {stat:.1} >= {crit:.1}");
}
