//! Symmetric positive definite matrices and their Cholesky factors.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// A validated symmetric positive definite matrix.
///
/// The Cholesky factor is computed once at construction and reused by every
/// solve, quadratic form, and log-determinant.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

/// Lower-triangular Cholesky factor `L` with `L * L^T` reconstructing the input.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangularFactor(pub DMatrix<f64>);

impl SpdMatrix {
    /// Validates symmetry (to `1e-12` relative) and positive definiteness.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..matrix.nrows() {
            for j in (i + 1)..matrix.ncols() {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::DimensionMismatch(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entries".into()));
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::NotPositiveDefinite("nonpositive Cholesky pivot".into()))?;
        Ok(Self { matrix, chol })
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    /// `1x1` matrix holding a positive scalar.
    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular Cholesky factor.
    pub fn cholesky_factor(&self) -> LowerTriangularFactor {
        LowerTriangularFactor(self.chol.l())
    }

    /// `log det` via the Cholesky pivots.
    pub fn logdet(&self) -> f64 {
        2.0 * self
            .chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.ln())
            .sum::<f64>()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// Quadratic form `v^T A^{-1} v`.
    pub fn inv_quad(&self, v: &DVector<f64>) -> f64 {
        v.dot(&self.chol.solve(v))
    }

    /// Full inverse; prefer [`SpdMatrix::solve`] when a single solve suffices.
    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// Applies `L z` for sampling transforms.
    pub fn lower_mul(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol.l_dirty().lower_triangle() * z
    }
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Cholesky factorization as a standalone operation.
///
/// Returns the lower-triangular factor `L` with `L L^T` equal to the input to
/// `1e-10` relative Frobenius error.
pub fn chol(spd: &SpdMatrix) -> LowerTriangularFactor {
    spd.cholesky_factor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    #[test]
    fn identity_factors_to_identity() {
        let spd = SpdMatrix::identity(3);
        let l = chol(&spd).0;
        assert_relative_eq!(l, DMatrix::identity(3, 3), epsilon = 1e-15);
    }

    #[test]
    fn two_by_two_factor_reconstructs() {
        let spd = SpdMatrix::new(dmatrix![4.0, 2.0; 2.0, 3.0]).unwrap();
        let l = chol(&spd).0;
        assert_relative_eq!(l[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(l[(1, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(l[(1, 1)], 2.0_f64.sqrt(), epsilon = 1e-12);
        let rec = &l * l.transpose();
        assert_relative_eq!(rec, *spd.matrix(), epsilon = 1e-10);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let err = SpdMatrix::new(dmatrix![1.0, 2.0; 2.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(_)));
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let err = SpdMatrix::new(dmatrix![1.0, 0.5; 0.1, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn logdet_matches_direct_determinant() {
        let spd = SpdMatrix::new(dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        assert_relative_eq!(spd.logdet(), 3.0_f64.ln(), epsilon = 1e-12);
    }

    fn random_spd(dim: usize, seed: u64) -> DMatrix<f64> {
        use rand::{rngs::StdRng, Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(seed);
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(dim, dim) * (dim as f64 * 0.1)
    }

    proptest! {
        #[test]
        fn factor_reconstructs_random_spd(dim in 1usize..=10, seed in 0u64..1000) {
            let m = random_spd(dim, seed);
            let spd = SpdMatrix::new(m.clone()).unwrap();
            let l = chol(&spd).0;
            let rec = &l * l.transpose();
            let err = (&rec - &m).norm() / m.norm();
            prop_assert!(err < 1e-10, "relative error {err}");
        }
    }
}
