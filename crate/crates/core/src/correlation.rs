//! Spatial correlation matrices, their eigendecomposition, and effective-rank
//! estimation by eigenvalue thresholding.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{FasError, Result};
use crate::geometry::{CorrelationKernel, SurfaceGeometry};

/// Default eigenvalue threshold below which a mode is treated as negligible.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-3;

/// Real symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    /// Wraps `m` after checking squareness, symmetry and the unit diagonal.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&m)?;
        for i in 0..m.nrows() {
            if (m[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(FasError::domain(format!(
                    "correlation diagonal entry {i} is {} (must be 1)",
                    m[(i, i)]
                )));
            }
        }
        if m.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(FasError::domain("correlation entries must lie in [-1, 1]"));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(FasError::domain(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(FasError::domain(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Correlation matrix of every port pair of `geom`.
pub fn build_correlation_matrix(
    geom: &SurfaceGeometry,
    kernel: &dyn CorrelationKernel,
) -> CorrelationMatrix {
    let pos = geom.positions();
    let n = pos.len();
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let c = kernel.correlation(&pos[i], &pos[j]);
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    CorrelationMatrix(m)
}

/// Orthonormal eigenvectors (columns) with eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl EigenDecomposition {
    pub fn identity(n: usize) -> Self {
        Self {
            vectors: DMatrix::identity(n, n),
            values: DVector::from_element(n, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U diag(lambda) U^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.values[j];
        }
        &scaled * self.vectors.transpose()
    }

    /// `U sqrt(max(lambda, 0))`, the factor that colours white noise.
    pub fn sqrt_factor(&self) -> DMatrix<f64> {
        let mut f = self.vectors.clone();
        for (j, mut col) in f.column_iter_mut().enumerate() {
            col *= self.values[j].max(0.0).sqrt();
        }
        f
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
/// Ties keep the solver's original column order.
pub fn eigendecompose(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(m.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { vectors, values })
}

/// Effective rank of a correlation matrix and the eigenvalue mass discarded
/// by truncating to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankEstimate {
    pub rank: usize,
    pub truncation_error: f64,
}

/// Counts eigenvalues at or above `threshold` (at least one). The truncation
/// error is the sum of the remaining eigenvalues, clamped at zero.
pub fn estimate_rank(eig: &EigenDecomposition, threshold: f64) -> Result<RankEstimate> {
    if !(threshold > 0.0) {
        return Err(FasError::domain(format!(
            "rank threshold must be positive, got {threshold}"
        )));
    }
    let rank = eig
        .values
        .iter()
        .filter(|&&v| v >= threshold)
        .count()
        .max(1);
    let tail: f64 = eig.values.iter().skip(rank).sum();
    Ok(RankEstimate {
        rank,
        truncation_error: tail.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{IsotropicKernel2d, IsotropicKernel3d};
    use approx::assert_abs_diff_eq;

    #[test]
    fn tiny_matrices() {
        let one = build_correlation_matrix(
            &SurfaceGeometry::new(1, 1, 0.0, 0.0).unwrap(),
            &IsotropicKernel3d,
        );
        assert_eq!(one.matrix(), &DMatrix::identity(1, 1));

        let two = build_correlation_matrix(
            &SurfaceGeometry::new(1, 2, 0.0, 0.5).unwrap(),
            &IsotropicKernel3d,
        );
        assert_abs_diff_eq!(two.matrix()[(0, 1)], 0.0, epsilon = 1e-15);
        assert_eq!(two.matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn eigen_small_cases() {
        let e = eigendecompose(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0, 1.0]);

        let ones = DMatrix::from_element(2, 2, 1.0);
        let e = eigendecompose(&ones).unwrap();
        assert_abs_diff_eq!(e.values[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((e.reconstruct() - ones).norm(), 0.0, epsilon = 1e-14);

        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(eigendecompose(&skew), Err(FasError::Domain(_))));
    }

    #[test]
    fn trace_and_psd_of_dense_grid() {
        let geom = SurfaceGeometry::square(10, 1.0).unwrap();
        let j = build_correlation_matrix(&geom, &IsotropicKernel3d);
        let e = eigendecompose(j.matrix()).unwrap();
        assert_abs_diff_eq!(e.values.sum(), 100.0, epsilon = 1e-8 * 100.0);
        assert!(e.values[99] >= -1e-10);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        let err = (e.reconstruct() - j.matrix()).norm();
        assert!(err <= 1e-8 * 100.0, "reconstruction error {err}");
        let u = &e.vectors;
        assert!((u.transpose() * u - DMatrix::<f64>::identity(100, 100)).norm() < 1e-10);
    }

    #[test]
    fn rank_of_identity_and_threshold_validation() {
        let e = EigenDecomposition::identity(7);
        let r = estimate_rank(&e, 0.5).unwrap();
        assert_eq!(r.rank, 7);
        assert_eq!(r.truncation_error, 0.0);
        assert!(estimate_rank(&e, 0.0).is_err());
        // everything below threshold still reports rank 1
        assert_eq!(estimate_rank(&e, 2.0).unwrap().rank, 1);
    }

    #[test]
    fn grid_ranks_by_aperture() {
        for (w, rank) in [(1.0, 23), (0.5, 13)] {
            let geom = SurfaceGeometry::square(10, w).unwrap();
            let j = build_correlation_matrix(&geom, &IsotropicKernel3d);
            let r = estimate_rank(&eigendecompose(j.matrix()).unwrap(), 1e-3).unwrap();
            assert_eq!(r.rank, rank);
            assert!(r.truncation_error <= (100 - rank) as f64 * 1e-3);
        }
    }

    #[test]
    fn cylindrical_kernel_matrix_is_valid() {
        let geom = SurfaceGeometry::new(1, 40, 0.0, 2.0).unwrap();
        let j = build_correlation_matrix(&geom, &IsotropicKernel2d);
        let m = j.clone().into_inner();
        assert!(CorrelationMatrix::new(m).is_ok());
        let e = eigendecompose(j.matrix()).unwrap();
        assert!(e.values[39] >= -1e-10);
    }
}
