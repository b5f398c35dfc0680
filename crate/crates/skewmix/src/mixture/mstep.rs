//! M-steps: closed-form parameter updates plus the degrees-of-freedom
//! conditional maximization.

use log::warn;
use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::digamma;

use super::estep::{EStepState, LatentMoments};
use super::model::{ComponentParams, DofPolicy, Family, MixtureModel};
use crate::numerics::SpdMatrix;
use crate::skewdist::{CanonicalRestrictedParams, McConfig, UnrestrictedParams};
use crate::{Error, Result};

/// How the degrees of freedom are updated in the skew-t M-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofUpdate {
    /// One-step-late score equation with current-iterate plug-ins; no ascent
    /// guarantee.
    Osl,
    /// Conditional maximization of the actual observed log-likelihood by a
    /// safeguarded golden-section search; preserves monotone ascent.
    Ecme,
    /// Leave the degrees of freedom unchanged.
    Fixed,
}

/// Search interval for any degrees-of-freedom update.
pub(crate) const NU_RANGE: (f64, f64) = (0.5, 1000.0);

/// Checks every component keeps enough effective mass, then returns the mass
/// vector.
pub(crate) fn component_masses(z: &DMatrix<f64>, p: usize) -> Result<Vec<f64>> {
    let g = z.ncols();
    let mut masses = Vec::with_capacity(g);
    for h in 0..g {
        let mass = z.column(h).sum();
        if mass < (p + 1) as f64 {
            return Err(Error::DegenerateComponent {
                component: h,
                reason: format!("effective mass {mass:.3} below p + 1 = {}", p + 1),
            });
        }
        masses.push(mass);
    }
    Ok(masses)
}

/// Builds an SPD scale matrix from a raw update; symmetrizes first, and on a
/// Cholesky failure retries once with a diagonal jitter of `1e-10 trace / p`.
fn guarded_spd(raw: DMatrix<f64>, component: usize) -> Result<SpdMatrix> {
    let sym = 0.5 * (&raw + raw.transpose());
    match SpdMatrix::new(sym.clone()) {
        Ok(s) => Ok(s),
        Err(_) => {
            let p = sym.nrows();
            let jitter = 1e-10 * sym.trace() / p as f64;
            warn!("component {component}: scale update lost definiteness, jittering diagonal by {jitter:e}");
            let mut fixed = sym;
            for i in 0..p {
                fixed[(i, i)] += jitter;
            }
            SpdMatrix::new(fixed).map_err(|_| Error::DegenerateComponent {
                component,
                reason: "scale update is not positive definite even after jitter".into(),
            })
        }
    }
}

/// Closed-form M-step for the restricted skew-normal family.
pub fn mstep_rmsn(data: &DMatrix<f64>, state: &EStepState) -> Result<MixtureModel> {
    let LatentMoments::RestrictedNormal { e1, e2 } = &state.moments else {
        return Err(Error::InvalidOptions(
            "mstep_rmsn needs restricted skew-normal moments".into(),
        ));
    };
    let (n, p) = (data.nrows(), data.ncols());
    let g = state.z.ncols();
    let masses = component_masses(&state.z, p)?;

    let mut weights = Vec::with_capacity(g);
    let mut components = Vec::with_capacity(g);
    for h in 0..g {
        let n_h = masses[h];
        weights.push(n_h / n as f64);

        let mut ybar = DVector::zeros(p);
        let (mut s_e1, mut s_e2) = (0.0, 0.0);
        for j in 0..n {
            let zj = state.z[(j, h)];
            ybar += zj * data.row(j).transpose();
            s_e1 += zj * e1[(j, h)];
            s_e2 += zj * e2[(j, h)];
        }
        ybar /= n_h;
        let e1bar = s_e1 / n_h;

        // delta = sum z e1 (y - ybar) / (sum z e2 - n_h e1bar^2)
        let mut num = DVector::zeros(p);
        for j in 0..n {
            let zj = state.z[(j, h)];
            num += zj * e1[(j, h)] * (data.row(j).transpose() - &ybar);
        }
        let denom = s_e2 - n_h * e1bar * e1bar;
        let delta: DVector<f64> = num / denom;
        let mu = &ybar - &delta * e1bar;

        let mut sig_tilde = DMatrix::zeros(p, p);
        for j in 0..n {
            let zj = state.z[(j, h)];
            let r = data.row(j).transpose() - &mu;
            sig_tilde += zj
                * (&r * r.transpose() - e1[(j, h)] * (&delta * r.transpose())
                    - e1[(j, h)] * (&r * delta.transpose())
                    + e2[(j, h)] * (&delta * delta.transpose()));
        }
        sig_tilde /= n_h;
        let sigma = guarded_spd(&sig_tilde + &delta * delta.transpose(), h)?;
        components.push(ComponentParams::Restricted(
            CanonicalRestrictedParams::new(mu, sigma, delta, None).map_err(|e| match e {
                Error::InfeasibleSkewness(msg) => Error::DegenerateComponent {
                    component: h,
                    reason: msg,
                },
                other => other,
            })?,
        ));
    }
    MixtureModel::new(Family::Rmsn, weights, components, DofPolicy::PerComponent)
}

/// Closed-form M-step for the restricted skew-t family; the location, skewness
/// and scale updates are exact, and the degrees of freedom follow the
/// requested update rule.
pub fn mstep_rmst(
    data: &DMatrix<f64>,
    prev: &MixtureModel,
    state: &EStepState,
    dof_update: DofUpdate,
    mc: &McConfig,
) -> Result<MixtureModel> {
    let LatentMoments::RestrictedT { e1, e2, e3, e4 } = &state.moments else {
        return Err(Error::InvalidOptions(
            "mstep_rmst needs restricted skew-t moments".into(),
        ));
    };
    let (n, p) = (data.nrows(), data.ncols());
    let g = state.z.ncols();
    let masses = component_masses(&state.z, p)?;

    let mut weights = Vec::with_capacity(g);
    let mut mus = Vec::with_capacity(g);
    let mut deltas = Vec::with_capacity(g);
    let mut sigmas = Vec::with_capacity(g);
    for h in 0..g {
        let n_h = masses[h];
        weights.push(n_h / n as f64);

        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        let mut sy = DVector::zeros(p);
        let mut ty = DVector::zeros(p);
        for j in 0..n {
            let zj = state.z[(j, h)];
            let y = data.row(j).transpose();
            a += zj * e2[(j, h)];
            b += zj * e3[(j, h)];
            c += zj * e4[(j, h)];
            sy += zj * e2[(j, h)] * &y;
            ty += zj * e3[(j, h)] * &y;
        }
        let delta: DVector<f64> = (a * &ty - b * &sy) / (a * c - b * b);
        let mu: DVector<f64> = (&sy - &delta * b) / a;

        let mut sig_tilde = DMatrix::zeros(p, p);
        for j in 0..n {
            let zj = state.z[(j, h)];
            let r = data.row(j).transpose() - &mu;
            sig_tilde += zj
                * (e2[(j, h)] * (&r * r.transpose())
                    - e3[(j, h)] * (&delta * r.transpose())
                    - e3[(j, h)] * (&r * delta.transpose())
                    + e4[(j, h)] * (&delta * delta.transpose()));
        }
        sig_tilde /= n_h;
        let sigma = guarded_spd(&sig_tilde + &delta * delta.transpose(), h)?;
        mus.push(mu);
        deltas.push(delta);
        sigmas.push(sigma);
    }

    // Degrees of freedom.
    let prev_nus: Vec<f64> = prev
        .components()
        .iter()
        .map(|cp| cp.nu().expect("t family"))
        .collect();
    let nus = match dof_update {
        DofUpdate::Fixed => prev_nus,
        DofUpdate::Osl => {
            let per_component: Vec<f64> = (0..g)
                .map(|h| {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += state.z[(j, h)] * (e1[(j, h)] - e2[(j, h)]);
                    }
                    acc / masses[h]
                })
                .collect();
            match prev.dof_policy() {
                DofPolicy::Shared => {
                    let pooled = (0..g)
                        .map(|h| per_component[h] * masses[h])
                        .sum::<f64>()
                        / masses.iter().sum::<f64>();
                    let nu = solve_osl_score(pooled)?;
                    vec![nu; g]
                }
                _ => per_component
                    .iter()
                    .map(|&cbar| solve_osl_score(cbar))
                    .collect::<Result<Vec<f64>>>()?,
            }
        }
        DofUpdate::Ecme => {
            let mut nus = prev_nus.clone();
            let build = |nus: &[f64]| -> Result<MixtureModel> {
                build_rmst(weights.clone(), &mus, &sigmas, &deltas, nus, prev.dof_policy())
            };
            match prev.dof_policy() {
                DofPolicy::Shared => {
                    let best = golden_max(
                        |nu| {
                            let model = build(&vec![nu; g])?;
                            super::model::loglik(data, &model, mc)
                        },
                        NU_RANGE,
                    )?;
                    nus = vec![best; g];
                }
                _ => {
                    for h in 0..g {
                        let mut trial = nus.clone();
                        let best = golden_max(
                            |nu| {
                                trial[h] = nu;
                                let model = build(&trial)?;
                                super::model::loglik(data, &model, mc)
                            },
                            NU_RANGE,
                        )?;
                        nus[h] = best;
                    }
                }
            }
            nus
        }
    };

    build_rmst(weights, &mus, &sigmas, &deltas, &nus, prev.dof_policy())
}

fn build_rmst(
    weights: Vec<f64>,
    mus: &[DVector<f64>],
    sigmas: &[SpdMatrix],
    deltas: &[DVector<f64>],
    nus: &[f64],
    policy: DofPolicy,
) -> Result<MixtureModel> {
    let components = mus
        .iter()
        .zip(sigmas)
        .zip(deltas)
        .zip(nus)
        .enumerate()
        .map(|(h, (((mu, sigma), delta), &nu))| {
            CanonicalRestrictedParams::new(mu.clone(), sigma.clone(), delta.clone(), Some(nu))
                .map(ComponentParams::Restricted)
                .map_err(|e| match e {
                    Error::InfeasibleSkewness(msg) => Error::DegenerateComponent {
                        component: h,
                        reason: msg,
                    },
                    other => other,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(Family::Rmst, weights, components, policy)
}

/// Solves `log(nu/2) + 1 - psi(nu/2) + cbar = 0` for `nu` by bisection. The
/// left side is strictly decreasing in `nu`; when it has no root inside the
/// search interval the boundary value is returned (the score points outside
/// the admissible range).
pub(crate) fn solve_osl_score(cbar: f64) -> Result<f64> {
    let g = |nu: f64| (0.5 * nu).ln() + 1.0 - digamma(0.5 * nu) + cbar;
    let (lo, hi) = NU_RANGE;
    let (glo, ghi) = (g(lo), g(hi));
    if !glo.is_finite() || !ghi.is_finite() {
        return Err(Error::DofSolveFailed(format!(
            "score not evaluable at bracket: g({lo}) = {glo}, g({hi}) = {ghi}"
        )));
    }
    if glo <= 0.0 {
        return Ok(lo);
    }
    if ghi >= 0.0 {
        return Ok(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-8 * b {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section maximization over `log nu` on the given interval,
/// tolerance `1e-4` in `log nu`. Boundary maxima are legitimate results;
/// non-finite objective values are not.
pub(crate) fn golden_max<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    range: (f64, f64),
) -> Result<f64> {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (range.0.ln(), range.1.ln());
    let mut eval = |x: f64, f: &mut F| -> Result<f64> {
        let v = f(x.exp())?;
        if v.is_nan() {
            return Err(Error::DofSolveFailed(format!(
                "objective is NaN at nu = {}",
                x.exp()
            )));
        }
        Ok(v)
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, &mut f)?;
    let mut fd = eval(d, &mut f)?;
    while (b - a).abs() > 1e-4 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, &mut f)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, &mut f)?;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// M-step for the unrestricted families from Monte-Carlo latent moments. The
/// location/skewness/scale subproblem is a quadratic optimized by a short
/// inner coordinate sweep (the skewness system couples through the scale
/// matrix, unlike the restricted case).
pub fn mstep_unrestricted(
    data: &DMatrix<f64>,
    prev: &MixtureModel,
    state: &EStepState,
    dof_update: DofUpdate,
    mc: &McConfig,
) -> Result<MixtureModel> {
    let (ew, ewu, ewuu, elogw): (
        Option<&DMatrix<f64>>,
        &Vec<DMatrix<f64>>,
        &Vec<Vec<DMatrix<f64>>>,
        Option<&DMatrix<f64>>,
    ) = match &state.moments {
        LatentMoments::UnrestrictedT { e1, e2, e3, e4, .. } => (Some(e2), e3, e4, Some(e1)),
        LatentMoments::UnrestrictedNormal { eu, euu, .. } => (None, eu, euu, None),
        _ => {
            return Err(Error::InvalidOptions(
                "mstep_unrestricted needs unrestricted moments".into(),
            ))
        }
    };
    let (n, p) = (data.nrows(), data.ncols());
    let g = state.z.ncols();
    let masses = component_masses(&state.z, p)?;
    let is_t = prev.family().is_t();

    let mut weights = Vec::with_capacity(g);
    let mut mus = Vec::with_capacity(g);
    let mut deltas = Vec::with_capacity(g);
    let mut sigmas = Vec::with_capacity(g);
    for h in 0..g {
        let n_h = masses[h];
        weights.push(n_h / n as f64);

        // Sufficient statistics.
        let mut s_w = 0.0; // sum z E[w]
        let mut s_wy = DVector::zeros(p); // sum z E[w] y
        let mut s_u = DVector::zeros(p); // sum z E[w u]
        let mut s_uy = DMatrix::zeros(p, p); // sum z y E[w u]^T
        let mut s_uu = DMatrix::zeros(p, p); // sum z E[w u u^T]
        let mut s_wyy = DMatrix::zeros(p, p); // sum z E[w] y y^T
        for j in 0..n {
            let zj = state.z[(j, h)];
            let w = ew.map_or(1.0, |m| m[(j, h)]);
            let y = data.row(j).transpose();
            let u = ewu[h].row(j).transpose();
            s_w += zj * w;
            s_wy += zj * w * &y;
            s_u += zj * &u;
            s_uy += zj * (&y * u.transpose());
            s_uu += zj * &ewuu[h][j];
            s_wyy += zj * w * (&y * y.transpose());
        }

        // Coordinate sweep on the quadratic in (mu, delta, sigma_tilde).
        let prev_params = prev.components()[h].as_unrestricted().expect("validated");
        let mut delta = prev_params.delta().clone();
        let mut sig_tilde = prev_params.sigma_tilde()?.matrix().clone();
        let mut mu = DVector::zeros(p);
        for _ in 0..4 {
            // mu given delta.
            mu = (&s_wy - DMatrix::from_diagonal(&delta) * &s_u) / s_w;
            // delta given mu and sigma_tilde: (G o S_uu^T) delta = diag(G S_re),
            // S_re = sum z (y - mu) E[w u]^T.
            let gmat = SpdMatrix::new(0.5 * (&sig_tilde + sig_tilde.transpose()))?
                .inverse();
            let s_re = &s_uy - &mu * s_u.transpose();
            let mut m = DMatrix::zeros(p, p);
            let mut rhs = DVector::zeros(p);
            for k in 0..p {
                for l in 0..p {
                    m[(k, l)] = gmat[(k, l)] * s_uu[(l, k)];
                }
                rhs[k] = (gmat.row(k) * s_re.column(k))[(0, 0)];
            }
            delta = m
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::DegenerateComponent {
                    component: h,
                    reason: "singular skewness system".into(),
                })?;
            // sigma_tilde given mu and delta.
            let dd = DMatrix::from_diagonal(&delta);
            let raw = &s_wyy - &s_wy * mu.transpose() - &mu * s_wy.transpose()
                + s_w * (&mu * mu.transpose())
                - (&s_uy.transpose() - &s_u * mu.transpose()).transpose() * &dd
                - &dd * (&s_uy.transpose() - &s_u * mu.transpose())
                + &dd * &s_uu * &dd;
            sig_tilde = raw / n_h;
            sig_tilde = 0.5 * (&sig_tilde + sig_tilde.transpose());
        }
        let mut sigma_raw = sig_tilde.clone();
        for i in 0..p {
            sigma_raw[(i, i)] += delta[i] * delta[i];
        }
        let sigma = guarded_spd(sigma_raw, h)?;
        mus.push(mu);
        deltas.push(delta);
        sigmas.push(sigma);
    }

    let prev_nus: Vec<Option<f64>> = prev.components().iter().map(|cp| cp.nu()).collect();
    let nus: Vec<Option<f64>> = if !is_t {
        vec![None; g]
    } else {
        match dof_update {
            DofUpdate::Fixed => prev_nus,
            DofUpdate::Osl => {
                let e1 = elogw.expect("t moments");
                let e2 = ew.expect("t moments");
                let mut out = Vec::with_capacity(g);
                for h in 0..g {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += state.z[(j, h)] * (e1[(j, h)] - e2[(j, h)]);
                    }
                    out.push(Some(solve_osl_score(acc / masses[h])?));
                }
                if prev.dof_policy() == DofPolicy::Shared {
                    let pooled = out
                        .iter()
                        .zip(&masses)
                        .map(|(nu, m)| nu.unwrap() * m)
                        .sum::<f64>()
                        / masses.iter().sum::<f64>();
                    out = vec![Some(pooled); g];
                }
                out
            }
            DofUpdate::Ecme => {
                let mut nus: Vec<f64> = prev_nus.iter().map(|o| o.expect("t family")).collect();
                for h in 0..g {
                    let mut trial = nus.clone();
                    let best = golden_max(
                        |nu| {
                            trial[h] = nu;
                            let model = build_unrestricted(
                                weights.clone(),
                                &mus,
                                &sigmas,
                                &deltas,
                                &trial.iter().map(|&v| Some(v)).collect::<Vec<_>>(),
                                prev.dof_policy(),
                                is_t,
                            )?;
                            super::model::loglik(data, &model, mc)
                        },
                        NU_RANGE,
                    )?;
                    nus[h] = best;
                }
                nus.into_iter().map(Some).collect()
            }
        }
    };

    build_unrestricted(weights, &mus, &sigmas, &deltas, &nus, prev.dof_policy(), is_t)
}

#[allow(clippy::too_many_arguments)]
fn build_unrestricted(
    weights: Vec<f64>,
    mus: &[DVector<f64>],
    sigmas: &[SpdMatrix],
    deltas: &[DVector<f64>],
    nus: &[Option<f64>],
    policy: DofPolicy,
    is_t: bool,
) -> Result<MixtureModel> {
    let components = mus
        .iter()
        .zip(sigmas)
        .zip(deltas)
        .zip(nus)
        .enumerate()
        .map(|(h, (((mu, sigma), delta), &nu))| {
            UnrestrictedParams::new(mu.clone(), sigma.clone(), delta.clone(), nu)
                .map(ComponentParams::Unrestricted)
                .map_err(|e| match e {
                    Error::InfeasibleSkewness(msg) => Error::DegenerateComponent {
                        component: h,
                        reason: msg,
                    },
                    other => other,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let family = if is_t { Family::Umst } else { Family::Umsn };
    MixtureModel::new(family, weights, components, policy)
}
