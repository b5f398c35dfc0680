//! Conversions among the published parameterizations of the restricted family
//! and between conditioning-type and convolution-type parameters.
//!
//! Each published variant carries its own skewness vector; all of them map
//! onto the canonical `(mu, sigma, delta)` triple by a linear substitution:
//!
//! | variant | canonical delta        |
//! |---------|------------------------|
//! | B, P    | `delta`                |
//! | A       | `D delta_A`            |
//! | G       | `sigma delta_G`        |
//! | SNI     | `sigma^{1/2} delta_S`  |
//!
//! with `D = diag(sqrt(sigma_11), ..., sqrt(sigma_pp))` and `sigma^{1/2}` the
//! symmetric square root.

use nalgebra::{DMatrix, DVector};

use crate::numerics::SpdMatrix;
use crate::skewdist::CanonicalRestrictedParams;
use crate::{Error, Result};

/// Which published parameterization a [`VariantParams`] value uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantTag {
    /// Scale-invariant skewness through the correlation matrix.
    A,
    /// Skewness enters through `sigma^{-1}` directly.
    B,
    /// Skewness premultiplied by `sigma`.
    G,
    /// Identical in form to B.
    P,
    /// Skewness through the symmetric square root of `sigma`.
    Sni,
}

impl VariantTag {
    pub const ALL: [VariantTag; 5] = [
        VariantTag::A,
        VariantTag::B,
        VariantTag::G,
        VariantTag::P,
        VariantTag::Sni,
    ];
}

/// Restricted-family parameters in one of the five published forms.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantParams {
    tag: VariantTag,
    mu: DVector<f64>,
    sigma: SpdMatrix,
    skew: DVector<f64>,
    nu: Option<f64>,
}

impl VariantParams {
    pub fn new(
        tag: VariantTag,
        mu: DVector<f64>,
        sigma: SpdMatrix,
        skew: DVector<f64>,
        nu: Option<f64>,
    ) -> Result<Self> {
        let p = mu.len();
        if sigma.dim() != p || skew.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "mu has {p} entries, sigma is {}x{}, skew has {}",
                sigma.dim(),
                sigma.dim(),
                skew.len()
            )));
        }
        if let Some(nu) = nu {
            if !(nu > 0.0) {
                return Err(Error::InvalidDof(nu));
            }
        }
        let v = Self {
            tag,
            mu,
            sigma,
            skew,
            nu,
        };
        let s = v.skew_var();
        if !(s > 0.0) {
            return Err(Error::InfeasibleSkewness(format!(
                "variant {tag:?} skewing variance {s} must be positive"
            )));
        }
        Ok(v)
    }

    pub fn tag(&self) -> VariantTag {
        self.tag
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn skew(&self) -> &DVector<f64> {
        &self.skew
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    /// Variance of the univariate skewing argument in this variant's own
    /// formula; positivity is exactly the variant's feasibility condition.
    pub fn skew_var(&self) -> f64 {
        match self.tag {
            VariantTag::A => {
                let r = correlation_of(&self.sigma);
                1.0 - self.skew.dot(&r.solve(&self.skew))
            }
            VariantTag::B | VariantTag::P => 1.0 - self.sigma.inv_quad(&self.skew),
            VariantTag::G => 1.0 - self.skew.dot(&(self.sigma.matrix() * &self.skew)),
            VariantTag::Sni => 1.0 - self.skew.dot(&self.skew),
        }
    }
}

/// Diagonal scale matrix `D = diag(sqrt(sigma_ii))`.
pub(crate) fn scale_diag(sigma: &SpdMatrix) -> DVector<f64> {
    sigma.matrix().diagonal().map(|v| v.sqrt())
}

/// Correlation matrix `R = D^{-1} sigma D^{-1}`.
pub(crate) fn correlation_of(sigma: &SpdMatrix) -> SpdMatrix {
    let d = scale_diag(sigma);
    let p = sigma.dim();
    let mut r = sigma.matrix().clone();
    for i in 0..p {
        for j in 0..p {
            r[(i, j)] /= d[i] * d[j];
        }
    }
    SpdMatrix::new(r).expect("correlation of an SPD matrix is SPD")
}

/// Maps a variant parameter set onto the canonical restricted form.
pub fn to_canonical(v: &VariantParams) -> Result<CanonicalRestrictedParams> {
    let delta = match v.tag() {
        VariantTag::B | VariantTag::P => v.skew().clone(),
        VariantTag::A => {
            let d = scale_diag(v.sigma());
            v.skew().component_mul(&d)
        }
        VariantTag::G => v.sigma().matrix() * v.skew(),
        VariantTag::Sni => spd_sqrt(v.sigma())?.matrix() * v.skew(),
    };
    CanonicalRestrictedParams::new(v.mu().clone(), v.sigma().clone(), delta, v.nu())
}

/// Inverse of [`to_canonical`] for the requested target form.
pub fn from_canonical(c: &CanonicalRestrictedParams, target: VariantTag) -> Result<VariantParams> {
    let skew = match target {
        VariantTag::B | VariantTag::P => c.delta().clone(),
        VariantTag::A => {
            let d = scale_diag(c.sigma());
            c.delta().component_div(&d)
        }
        VariantTag::G => c.sigma().solve(c.delta()),
        VariantTag::Sni => spd_sqrt(c.sigma())?.solve(c.delta()),
    };
    VariantParams::new(target, c.mu().clone(), c.sigma().clone(), skew, c.nu())
}

/// Parameters of the convolution-type representation
/// `Y = mu + delta_tilde |Y0| + Y1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionParams {
    pub mu: DVector<f64>,
    pub sigma_tilde: SpdMatrix,
    pub delta_tilde: DVector<f64>,
    pub nu: Option<f64>,
}

/// Conditioning parameters to convolution parameters:
/// `delta_tilde = delta`, `sigma_tilde = sigma - delta delta^T`.
pub fn conditioning_to_convolution(c: &CanonicalRestrictedParams) -> Result<ConvolutionParams> {
    Ok(ConvolutionParams {
        mu: c.mu().clone(),
        sigma_tilde: c.sigma_tilde()?,
        delta_tilde: c.delta().clone(),
        nu: c.nu(),
    })
}

/// Inverse map: `sigma = sigma_tilde + delta_tilde delta_tilde^T`. Always
/// feasible.
pub fn convolution_to_conditioning(v: &ConvolutionParams) -> Result<CanonicalRestrictedParams> {
    let sigma =
        SpdMatrix::new(v.sigma_tilde.matrix() + &v.delta_tilde * v.delta_tilde.transpose())?;
    CanonicalRestrictedParams::new(v.mu.clone(), sigma, v.delta_tilde.clone(), v.nu)
}

/// Unique symmetric positive definite square root (spectral form).
pub fn spd_sqrt(sigma: &SpdMatrix) -> Result<SpdMatrix> {
    let eig = sigma.matrix().clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite(
            "nonpositive eigenvalue in square root".into(),
        ));
    }
    let sqrt_vals = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()));
    let root = &eig.eigenvectors * sqrt_vals * eig.eigenvectors.transpose();
    let root = 0.5 * (&root + root.transpose());
    SpdMatrix::new(root)
}
