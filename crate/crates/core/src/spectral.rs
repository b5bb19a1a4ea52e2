//! Full eigendecomposition of the graph Laplacian.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;

/// Default relative tolerance for treating neighbouring eigenvalues as equal.
pub const DEFAULT_LAMBDA_REL_TOL: f64 = 1e-7;

const SIGN_THRESHOLD: f64 = 1e-9;

/// Ascending eigenvalues and an orthonormal eigenvector basis.
///
/// Column `j` of the eigenvector matrix is the `j`-th eigenvector (0-based).
/// Column 0 is exactly `1/sqrt(n)`; every other column has its first entry
/// of magnitude above `1e-9` positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    multiplicity_groups: Vec<Vec<usize>>,
    lambda_tol: f64,
}

impl SpectralBasis {
    /// Assembles a basis from already normalized parts, e.g. a cache file.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>, lambda_rel_tol: f64) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: eigenvectors.nrows(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NumericalFailure("eigenvalues are not in ascending order".into()));
        }
        let lambda_max = eigenvalues[n - 1];
        let lambda_tol = lambda_rel_tol * lambda_max.max(1.0);
        if n > 1 && eigenvalues[1] < lambda_tol {
            return Err(Error::ZeroEigenvalueMultiplicity {
                lambda2: eigenvalues[1],
                tol: lambda_tol,
            });
        }
        let multiplicity_groups = multiplicity_groups(&eigenvalues, lambda_tol);
        Ok(SpectralBasis {
            eigenvalues,
            eigenvectors,
            multiplicity_groups,
            lambda_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j]
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// The `j`-th eigenvector as a contiguous slice.
    pub fn eigenvector(&self, j: usize) -> &[f64] {
        let n = self.dim();
        &self.eigenvectors.as_slice()[j * n..(j + 1) * n]
    }

    /// Groups of consecutive indices whose eigenvalues agree within `lambda_tol`.
    /// Only groups of size at least two are listed.
    pub fn multiplicity_groups(&self) -> &[Vec<usize>] {
        &self.multiplicity_groups
    }

    pub fn lambda_tol(&self) -> f64 {
        self.lambda_tol
    }

    /// Coefficients `phi_j^T f` for every `j`.
    pub fn projection(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), f.len())?;
        Ok((0..self.dim()).map(|j| dot(self.eigenvector(j), f)).collect())
    }

    /// Inverse of [`projection`](Self::projection).
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), coeffs.len())?;
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (j, &c) in coeffs.iter().enumerate() {
            for (o, p) in out.iter_mut().zip(self.eigenvector(j)) {
                *o += c * p;
            }
        }
        Ok(out)
    }
}

/// Computes the full spectrum of `laplacian`, sorted ascending.
pub fn eigendecompose(laplacian: &LaplacianMatrix, lambda_rel_tol: f64) -> Result<SpectralBasis> {
    let n = laplacian.dim();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let max_iterations = 64 * n + 1000;
    let eig = SymmetricEigen::try_new(laplacian.matrix().clone(), f64::EPSILON, max_iterations)
        .ok_or_else(|| Error::NumericalFailure("symmetric QR iteration did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let sign = col
            .iter()
            .find(|x| x.abs() > SIGN_THRESHOLD)
            .map_or(1.0, |x| x.signum());
        for i in 0..n {
            vectors[(i, dst)] = sign * col[i];
        }
    }

    let lambda_tol = lambda_rel_tol * eigenvalues[n - 1].max(1.0);
    if eigenvalues[0].abs() > lambda_tol {
        return Err(Error::NumericalFailure(format!(
            "smallest eigenvalue {:e} is not zero",
            eigenvalues[0]
        )));
    }
    eigenvalues[0] = 0.0;
    let c = 1.0 / (n as f64).sqrt();
    vectors.column_mut(0).fill(c);

    SpectralBasis::from_parts(eigenvalues, vectors, lambda_rel_tol)
}

/// Coefficients `phi_j^T f` for every eigenvector.
pub fn spectral_projection(basis: &SpectralBasis, f: &[f64]) -> Result<Vec<f64>> {
    basis.projection(f)
}

fn multiplicity_groups(eigenvalues: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut current = vec![0];
    for i in 1..eigenvalues.len() {
        if (eigenvalues[i] - eigenvalues[i - 1]).abs() < tol {
            current.push(i);
        } else {
            if current.len() > 1 {
                groups.push(std::mem::take(&mut current));
            }
            current = vec![i];
        }
    }
    if current.len() > 1 {
        groups.push(current);
    }
    groups
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{RawEdge, WeightedGraph};
    use approx::assert_abs_diff_eq;

    fn basis_of(list: &[(u64, u64, f64)]) -> SpectralBasis {
        let edges: Vec<_> = list.iter().map(|&(u, v, w)| RawEdge::new(u, v, w)).collect();
        let g = WeightedGraph::build(&edges, None).unwrap();
        eigendecompose(&g.laplacian(), DEFAULT_LAMBDA_REL_TOL).unwrap()
    }

    fn assert_vec(actual: &[f64], expected: &[f64], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert_abs_diff_eq!(*a, *e, epsilon = tol);
        }
    }

    #[test]
    fn p2_spectrum() {
        let b = basis_of(&[(1, 2, 1.0)]);
        let s = 0.5_f64.sqrt();
        assert_vec(b.eigenvalues(), &[0.0, 2.0], 1e-12);
        assert_vec(b.eigenvector(0), &[s, s], 1e-15);
        assert_vec(b.eigenvector(1), &[s, -s], 1e-12);
    }

    #[test]
    fn p3_spectrum() {
        let b = basis_of(&[(1, 2, 1.0), (2, 3, 1.0)]);
        assert_vec(b.eigenvalues(), &[0.0, 1.0, 3.0], 1e-12);
        let r2 = 2.0_f64.sqrt();
        let r6 = 6.0_f64.sqrt();
        assert_vec(b.eigenvector(1), &[1.0 / r2, 0.0, -1.0 / r2], 1e-12);
        assert_vec(b.eigenvector(2), &[1.0 / r6, -2.0 / r6, 1.0 / r6], 1e-12);
        assert!(b.multiplicity_groups().is_empty());
    }

    #[test]
    fn c4_multiplicity_flagged() {
        let b = basis_of(&[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 1, 1.0)]);
        assert_vec(b.eigenvalues(), &[0.0, 2.0, 2.0, 4.0], 1e-12);
        assert_eq!(b.multiplicity_groups(), &[vec![1, 2]]);
    }

    #[test]
    fn p3_projections() {
        let b = basis_of(&[(1, 2, 1.0), (2, 3, 1.0)]);
        let r2 = 2.0_f64.sqrt();
        let r3 = 3.0_f64.sqrt();
        assert_vec(
            &spectral_projection(&b, &[1.0, 1.0, 1.0]).unwrap(),
            &[r3, 0.0, 0.0],
            1e-12,
        );
        let phi2 = b.eigenvector(1).to_vec();
        assert_vec(&spectral_projection(&b, &phi2).unwrap(), &[0.0, 1.0, 0.0], 1e-12);
        assert_vec(
            &spectral_projection(&b, &[1.0, 2.0, 3.0]).unwrap(),
            &[2.0 * r3, -r2, 0.0],
            1e-12,
        );
        assert!(matches!(
            spectral_projection(&b, &[1.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn repeated_calls_are_bit_identical() {
        let b1 = basis_of(&[(1, 2, 1.5), (2, 3, 0.5), (3, 4, 2.0), (4, 1, 1.0), (1, 3, 0.7)]);
        let b2 = basis_of(&[(1, 2, 1.5), (2, 3, 0.5), (3, 4, 2.0), (4, 1, 1.0), (1, 3, 0.7)]);
        assert_eq!(b1, b2);
    }

    #[test]
    fn from_parts_rejects_double_zero() {
        let v = DMatrix::identity(2, 2);
        assert!(matches!(
            SpectralBasis::from_parts(vec![0.0, 0.0], v, DEFAULT_LAMBDA_REL_TOL),
            Err(Error::ZeroEigenvalueMultiplicity { .. })
        ));
    }
}
