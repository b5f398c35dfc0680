//! Monte-Carlo E-step for the unrestricted families.
//!
//! The latent posterior factorizes as a gamma draw for `W` (exact) and a
//! `N_p(m, Lambda/w)` draw for `U` truncated to the positive orthant. We
//! sample the untruncated normal and weight by the orthant indicator, which is
//! importance sampling of the truncated law with self-normalized weights; the
//! effective sample size is the number of accepted draws.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::estep::{EStepState, LatentMoments};
use super::model::{Family, MixtureModel};
use crate::skewdist::{shard_seed, McConfig, UnrestrictedParams};
use crate::{Error, Result};

/// Dimension bound for the Monte-Carlo E-step (orthant acceptance decays like
/// `2^-p`).
pub const MAX_MC_ESTEP_DIM: usize = 4;

const MIN_ESS: f64 = 100.0;

/// Per-point conditional draws of `(W, U)` for one unrestricted component.
struct ComponentDraws {
    elogw: f64,
    ew: f64,
    se_ew: f64,
    ewu: DVector<f64>,
    ewuu: DMatrix<f64>,
    ess: f64,
}

fn conditional_draws(
    params: &UnrestrictedParams,
    y: &DVector<f64>,
    draws: usize,
    seed: u64,
) -> Result<ComponentDraws> {
    let p = params.dim();
    let nu = params.nu();
    let r = y - params.mu();
    let m = params.sigma().solve(&r).component_mul(params.delta());
    let d = params.sigma().inv_quad(&r);
    let l_lambda = params.lambda().cholesky_factor().0;
    let mut rng = StdRng::seed_from_u64(seed);

    let gamma = nu.map(|nu| {
        let shape = 0.5 * (nu + p as f64);
        let rate = 0.5 * (nu + d);
        Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters")
    });

    let mut kept = 0usize;
    let (mut s_logw, mut s_w, mut s_w2) = (0.0, 0.0, 0.0);
    let mut s_wu = DVector::zeros(p);
    let mut s_wuu = DMatrix::zeros(p, p);
    for _ in 0..draws {
        let w = match &gamma {
            Some(g) => g.sample(&mut rng),
            None => 1.0,
        };
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let u = &m + &l_lambda * z / w.sqrt();
        if u.iter().any(|&v| v <= 0.0) {
            continue;
        }
        kept += 1;
        s_logw += w.ln();
        s_w += w;
        s_w2 += w * w;
        for i in 0..p {
            s_wu[i] += w * u[i];
            for k in 0..p {
                s_wuu[(i, k)] += w * u[i] * u[k];
            }
        }
    }
    let ess = kept as f64;
    if ess < MIN_ESS {
        return Err(Error::EffectiveSampleSizeTooLow { ess, min: MIN_ESS });
    }
    let ew = s_w / ess;
    let var_w = (s_w2 / ess - ew * ew).max(0.0);
    Ok(ComponentDraws {
        elogw: s_logw / ess,
        ew,
        se_ew: (var_w / ess).sqrt(),
        ewu: s_wu / ess,
        ewuu: s_wuu / ess,
        ess,
    })
}

/// Monte-Carlo E-step for an unrestricted skew-t mixture. Deterministic for a
/// given seed; each `(row, component)` pair gets its own derived stream.
pub fn estep_umst_mc(
    data: &DMatrix<f64>,
    model: &MixtureModel,
    draws: usize,
    seed: u64,
) -> Result<EStepState> {
    if model.family() != Family::Umst {
        return Err(Error::InvalidOptions("estep_umst_mc needs a umst model".into()));
    }
    estep_unrestricted(data, model, draws, seed)
}

/// Monte-Carlo E-step for an unrestricted skew-normal mixture (the latent
/// weight `W` is identically one).
pub fn estep_umsn_mc(
    data: &DMatrix<f64>,
    model: &MixtureModel,
    draws: usize,
    seed: u64,
) -> Result<EStepState> {
    if model.family() != Family::Umsn {
        return Err(Error::InvalidOptions("estep_umsn_mc needs a umsn model".into()));
    }
    estep_unrestricted(data, model, draws, seed)
}

fn estep_unrestricted(
    data: &DMatrix<f64>,
    model: &MixtureModel,
    draws: usize,
    seed: u64,
) -> Result<EStepState> {
    let p = model.dim();
    if p > MAX_MC_ESTEP_DIM {
        return Err(Error::DimensionTooLarge {
            dim: p,
            max: MAX_MC_ESTEP_DIM,
        });
    }
    if draws < 1 {
        return Err(Error::EmptyInput);
    }
    let mc = McConfig {
        draws: 4096,
        seed: shard_seed(seed, 0xE57),
    };
    let z = super::model::responsibilities(data, model, &mc)?;
    let (n, g) = (data.nrows(), model.n_components());
    let is_t = model.family().is_t();

    let mut e1 = DMatrix::zeros(n, g);
    let mut e2 = DMatrix::zeros(n, g);
    let mut e3: Vec<DMatrix<f64>> = (0..g).map(|_| DMatrix::zeros(n, p)).collect();
    let mut e4: Vec<Vec<DMatrix<f64>>> = (0..g)
        .map(|_| (0..n).map(|_| DMatrix::zeros(p, p)).collect())
        .collect();
    let mut ess = DMatrix::zeros(n, g);
    let mut se2 = DMatrix::zeros(n, g);

    for h in 0..g {
        let params = model.components()[h].as_unrestricted().expect("validated");
        for j in 0..n {
            let y = data.row(j).transpose();
            let stream = shard_seed(seed, (j as u64) * 64 + h as u64 + 1);
            let cd = conditional_draws(params, &y, draws, stream)?;
            e1[(j, h)] = cd.elogw;
            e2[(j, h)] = cd.ew;
            se2[(j, h)] = cd.se_ew;
            for i in 0..p {
                e3[h][(j, i)] = cd.ewu[i];
            }
            e4[h][j] = cd.ewuu;
            ess[(j, h)] = cd.ess;
        }
    }

    let moments = if is_t {
        LatentMoments::UnrestrictedT {
            e1,
            e2,
            e3,
            e4,
            ess,
            se2,
        }
    } else {
        LatentMoments::UnrestrictedNormal {
            eu: e3,
            euu: e4,
            ess,
        }
    };
    Ok(EStepState { z, moments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::estep::{estep_rmst, LatentMoments};
    use crate::mixture::model::{ComponentParams, DofPolicy};
    use crate::numerics::SpdMatrix;
    use crate::skewdist::CanonicalRestrictedParams;
    use nalgebra::dvector;

    fn umst_model(delta: DVector<f64>, nu: f64) -> MixtureModel {
        let p = delta.len();
        MixtureModel::new(
            Family::Umst,
            vec![1.0],
            vec![ComponentParams::Unrestricted(
                UnrestrictedParams::new(
                    DVector::zeros(p),
                    SpdMatrix::identity(p),
                    delta,
                    Some(nu),
                )
                .unwrap(),
            )],
            DofPolicy::PerComponent,
        )
        .unwrap()
    }

    #[test]
    fn univariate_case_matches_restricted_closed_form() {
        let nu = 6.0;
        let m_u = umst_model(dvector![0.5], nu);
        let m_r = MixtureModel::new(
            Family::Rmst,
            vec![1.0],
            vec![ComponentParams::Restricted(
                CanonicalRestrictedParams::new(
                    dvector![0.0],
                    SpdMatrix::identity(1),
                    dvector![0.5],
                    Some(nu),
                )
                .unwrap(),
            )],
            DofPolicy::PerComponent,
        )
        .unwrap();
        let data = DMatrix::from_column_slice(3, 1, &[-1.2, 0.3, 1.7]);
        let mc_state = estep_umst_mc(&data, &m_u, 200_000, 11).unwrap();
        let cf_state = estep_rmst(&data, &m_r, &McConfig::default()).unwrap();
        let LatentMoments::UnrestrictedT {
            e2: mc2,
            e3: mc3,
            se2,
            ess,
            ..
        } = &mc_state.moments
        else {
            panic!()
        };
        let LatentMoments::RestrictedT { e2: cf2, e3: cf3, .. } = &cf_state.moments else {
            panic!()
        };
        for j in 0..3 {
            assert!(ess[(j, 0)] > 1000.0);
            let tol = 4.0 * se2[(j, 0)] + 1e-3;
            assert!(
                (mc2[(j, 0)] - cf2[(j, 0)]).abs() < tol,
                "e2 row {j}: {} vs {}",
                mc2[(j, 0)],
                cf2[(j, 0)]
            );
            assert!(
                (mc3[0][(j, 0)] - cf3[(j, 0)]).abs() < 10.0 * tol,
                "e3 row {j}: {} vs {}",
                mc3[0][(j, 0)],
                cf3[(j, 0)]
            );
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let model = umst_model(dvector![0.4, -0.3], 8.0);
        let data = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, 1.0, 0.2]);
        let a = estep_umst_mc(&data, &model, 20_000, 5).unwrap();
        let b = estep_umst_mc(&data, &model, 20_000, 5).unwrap();
        let LatentMoments::UnrestrictedT { e2: a2, .. } = &a.moments else { panic!() };
        let LatentMoments::UnrestrictedT { e2: b2, .. } = &b.moments else { panic!() };
        assert_eq!(a2, b2);
    }

    #[test]
    fn se_halves_when_draws_quadruple() {
        // log-log slope of se against draws should sit near -1/2.
        let model = umst_model(dvector![0.4, -0.3], 8.0);
        let data = DMatrix::from_row_slice(1, 2, &[0.8, -0.1]);
        let mut ses = Vec::new();
        let draw_grid = [20_000usize, 40_000, 80_000, 160_000];
        for (k, &dr) in draw_grid.iter().enumerate() {
            let st = estep_umst_mc(&data, &model, dr, 100 + k as u64).unwrap();
            let LatentMoments::UnrestrictedT { se2, .. } = &st.moments else { panic!() };
            ses.push(se2[(0, 0)]);
        }
        let xs: Vec<f64> = draw_grid.iter().map(|d| (*d as f64).ln()).collect();
        let ys: Vec<f64> = ses.iter().map(|s| s.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 4.0;
        let ym = ys.iter().sum::<f64>() / 4.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn dimension_cap() {
        let model = umst_model(dvector![0.1, 0.1, 0.1, 0.1, 0.1], 5.0);
        let data = DMatrix::zeros(1, 5);
        assert!(matches!(
            estep_umst_mc(&data, &model, 10_000, 1),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
