//! Finite mixtures of skew distributions fitted by EM.
//!
//! Closed-form E- and M-steps drive the restricted families; the unrestricted
//! families use a Monte-Carlo E-step at small dimension. Degrees of freedom
//! update by a one-step-late score equation, by conditional maximization of
//! the observed log-likelihood (which preserves monotone ascent), or stay
//! fixed.

mod estep;
mod fit;
mod init;
mod mc_estep;
mod model;
mod mstep;

pub use estep::{estep_rmsn, estep_rmst, EStepState, LatentMoments};
pub use fit::{fit_em, fit_em_from, FitOptions};
pub use init::{init_params, InitStrategy};
pub use mc_estep::{estep_umsn_mc, estep_umst_mc, MAX_MC_ESTEP_DIM};
pub use model::{
    loglik, mixture_logpdf, responsibilities, ComponentParams, DofPolicy, Family, FitReport,
    MixtureModel,
};
pub use mstep::{mstep_rmsn, mstep_rmst, mstep_unrestricted, DofUpdate};
