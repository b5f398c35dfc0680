//! Mixture model container, mixture density, and responsibilities.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{logsumexp, stable_sum};
use crate::skewdist::{
    rmsn_logpdf, rmst_logpdf, shard_seed, umsn_logpdf, umst_logpdf, CanonicalRestrictedParams,
    McConfig, UnrestrictedParams,
};
use crate::{Error, Result};

/// Which mixture family the model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Rmsn,
    Rmst,
    Umsn,
    Umst,
}

impl Family {
    pub fn is_t(self) -> bool {
        matches!(self, Family::Rmst | Family::Umst)
    }

    pub fn is_restricted(self) -> bool {
        matches!(self, Family::Rmsn | Family::Rmst)
    }
}

/// How degrees of freedom are treated across components during fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofPolicy {
    PerComponent,
    Shared,
    Fixed,
}

/// Parameters of a single mixture component.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentParams {
    Restricted(CanonicalRestrictedParams),
    Unrestricted(UnrestrictedParams),
}

impl ComponentParams {
    pub fn dim(&self) -> usize {
        match self {
            ComponentParams::Restricted(p) => p.dim(),
            ComponentParams::Unrestricted(p) => p.dim(),
        }
    }

    pub fn nu(&self) -> Option<f64> {
        match self {
            ComponentParams::Restricted(p) => p.nu(),
            ComponentParams::Unrestricted(p) => p.nu(),
        }
    }

    pub fn mu(&self) -> &DVector<f64> {
        match self {
            ComponentParams::Restricted(p) => p.mu(),
            ComponentParams::Unrestricted(p) => p.mu(),
        }
    }

    pub fn as_restricted(&self) -> Option<&CanonicalRestrictedParams> {
        match self {
            ComponentParams::Restricted(p) => Some(p),
            ComponentParams::Unrestricted(_) => None,
        }
    }

    pub fn as_unrestricted(&self) -> Option<&UnrestrictedParams> {
        match self {
            ComponentParams::Unrestricted(p) => Some(p),
            ComponentParams::Restricted(_) => None,
        }
    }
}

/// A finite mixture over one of the four supported families.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    family: Family,
    weights: Vec<f64>,
    components: Vec<ComponentParams>,
    dof_policy: DofPolicy,
}

impl MixtureModel {
    pub fn new(
        family: Family,
        weights: Vec<f64>,
        components: Vec<ComponentParams>,
        dof_policy: DofPolicy,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidOptions("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidOptions(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let dim = components[0].dim();
        for (h, c) in components.iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "component {h} has dimension {}, expected {dim}",
                    c.dim()
                )));
            }
            let restricted_ok = family.is_restricted() == matches!(c, ComponentParams::Restricted(_));
            let nu_ok = family.is_t() == c.nu().is_some();
            if !restricted_ok || !nu_ok {
                return Err(Error::InvalidOptions(format!(
                    "component {h} does not match family {family:?}"
                )));
            }
        }
        Ok(Self {
            family,
            weights,
            components,
            dof_policy,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ComponentParams] {
        &self.components
    }

    pub fn dof_policy(&self) -> DofPolicy {
        self.dof_policy
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    /// Log-density of component `h` at `y`. Monte-Carlo-backed families fold
    /// in a per-call seed derived from `(mc.seed, tag, h)` so evaluations stay
    /// reproducible and distinct across rows.
    pub(crate) fn component_logpdf(
        &self,
        y: &DVector<f64>,
        h: usize,
        mc: &McConfig,
        tag: u64,
    ) -> Result<f64> {
        match (&self.components[h], self.family) {
            (ComponentParams::Restricted(p), Family::Rmsn) => rmsn_logpdf(y, p),
            (ComponentParams::Restricted(p), Family::Rmst) => rmst_logpdf(y, p),
            (ComponentParams::Unrestricted(p), Family::Umsn) => {
                let cfg = McConfig {
                    draws: mc.draws,
                    seed: shard_seed(mc.seed, tag.wrapping_mul(64).wrapping_add(h as u64)),
                };
                Ok(umsn_logpdf(y, p, &cfg)?.value)
            }
            (ComponentParams::Unrestricted(p), Family::Umst) => {
                let cfg = McConfig {
                    draws: mc.draws,
                    seed: shard_seed(mc.seed, tag.wrapping_mul(64).wrapping_add(h as u64)),
                };
                Ok(umst_logpdf(y, p, &cfg)?.value)
            }
            _ => Err(Error::InvalidOptions("component/family mismatch".into())),
        }
    }
}

/// Mixture log-density `log sum_h pi_h f(y; theta_h)`, evaluated in log space.
pub fn mixture_logpdf(y: &DVector<f64>, model: &MixtureModel, mc: &McConfig) -> Result<f64> {
    let mut terms = Vec::with_capacity(model.n_components());
    for h in 0..model.n_components() {
        terms.push(model.weights()[h].ln() + model.component_logpdf(y, h, mc, 0)?);
    }
    logsumexp(&terms)
}

/// Posterior component probabilities for every observation, rows normalized
/// to one. Computed entirely in log space.
pub fn responsibilities(
    data: &DMatrix<f64>,
    model: &MixtureModel,
    mc: &McConfig,
) -> Result<DMatrix<f64>> {
    let (n, g) = (data.nrows(), model.n_components());
    let mut z = DMatrix::zeros(n, g);
    let mut terms = vec![0.0; g];
    for j in 0..n {
        let y = DVector::from_row_slice(&data.row(j).transpose().as_slice().to_vec());
        for (h, t) in terms.iter_mut().enumerate() {
            *t = model.weights()[h].ln() + model.component_logpdf(&y, h, mc, j as u64 + 1)?;
        }
        let lse = logsumexp(&terms)?;
        if !lse.is_finite() {
            return Err(Error::AllZeroLikelihood { row: j });
        }
        let mut row: Vec<f64> = terms.iter().map(|t| (t - lse).exp()).collect();
        let total = stable_sum(&row);
        for v in &mut row {
            *v /= total;
        }
        for h in 0..g {
            z[(j, h)] = row[h];
        }
    }
    Ok(z)
}

/// Observed-data log-likelihood of the whole sample.
pub fn loglik(data: &DMatrix<f64>, model: &MixtureModel, mc: &McConfig) -> Result<f64> {
    let mut total = 0.0;
    let mut terms = vec![0.0; model.n_components()];
    for j in 0..data.nrows() {
        let y = DVector::from_row_slice(&data.row(j).transpose().as_slice().to_vec());
        for (h, t) in terms.iter_mut().enumerate() {
            *t = model.weights()[h].ln() + model.component_logpdf(&y, h, mc, j as u64 + 1)?;
        }
        let lse = logsumexp(&terms)?;
        if !lse.is_finite() {
            return Err(Error::AllZeroLikelihood { row: j });
        }
        total += lse;
    }
    Ok(total)
}

/// Result of a full EM fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: MixtureModel,
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub responsibilities: DMatrix<f64>,
    pub seed: u64,
}
