//! Validated parameter sets for the skew families.
//!
//! Feasibility is checked on construction, not at density evaluation, so an
//! M-step that walks out of the feasible region fails immediately.

use nalgebra::{DMatrix, DVector};

use crate::numerics::SpdMatrix;
use crate::{Error, Result};

/// Parameters of the canonical restricted family: location `mu`, scale
/// `sigma`, skewness vector `delta`, and optional degrees of freedom `nu`
/// (present means skew t, absent skew normal).
///
/// Feasibility requires `1 - delta^T sigma^{-1} delta > 0`, equivalently that
/// the convolution residual scale `sigma - delta delta^T` stays positive
/// definite.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalRestrictedParams {
    mu: DVector<f64>,
    sigma: SpdMatrix,
    delta: DVector<f64>,
    nu: Option<f64>,
    sigma_inv_delta: DVector<f64>,
    skew_var: f64,
}

impl CanonicalRestrictedParams {
    pub fn new(
        mu: DVector<f64>,
        sigma: SpdMatrix,
        delta: DVector<f64>,
        nu: Option<f64>,
    ) -> Result<Self> {
        let p = mu.len();
        if sigma.dim() != p || delta.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "mu has {p} entries, sigma is {}x{}, delta has {}",
                sigma.dim(),
                sigma.dim(),
                delta.len()
            )));
        }
        if let Some(nu) = nu {
            if !(nu > 0.0) {
                return Err(Error::InvalidDof(nu));
            }
        }
        let sigma_inv_delta = sigma.solve(&delta);
        let skew_var = 1.0 - delta.dot(&sigma_inv_delta);
        if !(skew_var > 0.0) {
            return Err(Error::InfeasibleSkewness(format!(
                "1 - delta^T sigma^-1 delta = {skew_var} must be positive"
            )));
        }
        Ok(Self {
            mu,
            sigma,
            delta,
            nu,
            sigma_inv_delta,
            skew_var,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    /// `sigma^{-1} delta`, cached at construction.
    pub fn sigma_inv_delta(&self) -> &DVector<f64> {
        &self.sigma_inv_delta
    }

    /// `1 - delta^T sigma^{-1} delta`, the variance of the univariate skewing
    /// argument.
    pub fn skew_var(&self) -> f64 {
        self.skew_var
    }

    /// Residual scale of the convolution representation,
    /// `sigma - delta delta^T`.
    pub fn sigma_tilde(&self) -> Result<SpdMatrix> {
        let m = self.sigma.matrix() - &self.delta * self.delta.transpose();
        SpdMatrix::new(m)
            .map_err(|_| Error::InfeasibleSkewness("sigma - delta delta^T is not SPD".into()))
    }

    /// Same parameters with the degrees of freedom replaced.
    pub fn with_nu(&self, nu: Option<f64>) -> Result<Self> {
        Self::new(self.mu.clone(), self.sigma.clone(), self.delta.clone(), nu)
    }
}

/// Parameters of the unrestricted family, where the skewness matrix is
/// `diag(delta)` and the latent vector has dimension p.
///
/// Feasibility requires `Lambda = I - D sigma^{-1} D` positive definite,
/// `D = diag(delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrestrictedParams {
    mu: DVector<f64>,
    sigma: SpdMatrix,
    delta: DVector<f64>,
    nu: Option<f64>,
    lambda: SpdMatrix,
}

impl UnrestrictedParams {
    pub fn new(
        mu: DVector<f64>,
        sigma: SpdMatrix,
        delta: DVector<f64>,
        nu: Option<f64>,
    ) -> Result<Self> {
        let p = mu.len();
        if sigma.dim() != p || delta.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "mu has {p} entries, sigma is {}x{}, delta has {}",
                sigma.dim(),
                sigma.dim(),
                delta.len()
            )));
        }
        if let Some(nu) = nu {
            if !(nu > 0.0) {
                return Err(Error::InvalidDof(nu));
            }
        }
        let lambda = lambda_matrix(&sigma, &delta)?;
        Ok(Self {
            mu,
            sigma,
            delta,
            nu,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    /// `I - diag(delta) sigma^{-1} diag(delta)`.
    pub fn lambda(&self) -> &SpdMatrix {
        &self.lambda
    }

    /// Residual scale of the convolution representation,
    /// `sigma - diag(delta)^2`.
    pub fn sigma_tilde(&self) -> Result<SpdMatrix> {
        let mut m = self.sigma.matrix().clone();
        for i in 0..self.dim() {
            m[(i, i)] -= self.delta[i] * self.delta[i];
        }
        SpdMatrix::new(m)
            .map_err(|_| Error::InfeasibleSkewness("sigma - diag(delta)^2 is not SPD".into()))
    }

    pub fn with_nu(&self, nu: Option<f64>) -> Result<Self> {
        Self::new(self.mu.clone(), self.sigma.clone(), self.delta.clone(), nu)
    }
}

fn lambda_matrix(sigma: &SpdMatrix, delta: &DVector<f64>) -> Result<SpdMatrix> {
    let p = delta.len();
    let sigma_inv = sigma.inverse();
    let mut lambda = DMatrix::identity(p, p);
    for i in 0..p {
        for j in 0..p {
            lambda[(i, j)] -= delta[i] * sigma_inv[(i, j)] * delta[j];
        }
    }
    // Symmetrize away roundoff before validation.
    let lambda = 0.5 * (&lambda + lambda.transpose());
    SpdMatrix::new(lambda)
        .map_err(|_| Error::InfeasibleSkewness("I - D sigma^-1 D is not SPD".into()))
}

/// Parameters of the extended (unified) skew normal family: a q-dimensional
/// latent with location shift `tau`, scale `gamma`, and cross-covariance
/// `delta` (p x q).
///
/// The joint (q+p) scale matrix must be positive definite, which also makes
/// the conditional scale `gamma - delta^T sigma^{-1} delta` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedParams {
    mu: DVector<f64>,
    sigma: SpdMatrix,
    delta: DMatrix<f64>,
    gamma: SpdMatrix,
    tau: DVector<f64>,
    cond_cov: SpdMatrix,
}

impl ExtendedParams {
    pub fn new(
        mu: DVector<f64>,
        sigma: SpdMatrix,
        delta: DMatrix<f64>,
        gamma: SpdMatrix,
        tau: DVector<f64>,
    ) -> Result<Self> {
        let p = mu.len();
        let q = tau.len();
        if sigma.dim() != p || delta.nrows() != p || delta.ncols() != q || gamma.dim() != q {
            return Err(Error::DimensionMismatch(format!(
                "p={p}, q={q}: sigma {}x{}, delta {}x{}, gamma {}x{}",
                sigma.dim(),
                sigma.dim(),
                delta.nrows(),
                delta.ncols(),
                gamma.dim(),
                gamma.dim()
            )));
        }
        let cond = gamma.matrix() - delta.transpose() * sigma.solve_matrix(&delta);
        let cond = 0.5 * (&cond + cond.transpose());
        let cond_cov = SpdMatrix::new(cond).map_err(|_| {
            Error::InfeasibleSkewness("gamma - delta^T sigma^-1 delta is not SPD".into())
        })?;
        Ok(Self {
            mu,
            sigma,
            delta,
            gamma,
            tau,
            cond_cov,
        })
    }

    /// Canonical fundamental form: `tau = 0`, `gamma = I_q`.
    pub fn cfusn(mu: DVector<f64>, sigma: SpdMatrix, delta: DMatrix<f64>) -> Result<Self> {
        let q = delta.ncols();
        Self::new(
            mu,
            sigma,
            delta,
            SpdMatrix::identity(q),
            DVector::zeros(q),
        )
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.tau.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }

    pub fn gamma(&self) -> &SpdMatrix {
        &self.gamma
    }

    pub fn tau(&self) -> &DVector<f64> {
        &self.tau
    }

    /// `gamma - delta^T sigma^{-1} delta`.
    pub fn cond_cov(&self) -> &SpdMatrix {
        &self.cond_cov
    }
}

/// Which stochastic representation generated a batch of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// `Y = mu + (Y1 | Y0 > 0)` via rejection on the sign constraints.
    Conditioning,
    /// `Y = mu + delta |Y0| + Y1` via half-normal or truncated latents.
    Convolution,
}

/// Rows of samples plus the seed and representation that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub rows: DMatrix<f64>,
    pub seed: u64,
    pub representation: Representation,
}

impl SpdMatrix {
    /// Solves `A X = B` column by column.
    pub(crate) fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col = DVector::from_column_slice(b.column(j).as_slice());
            out.set_column(j, &self.solve(&col));
        }
        out
    }
}
