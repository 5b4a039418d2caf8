//! Small sparse/dense helpers shared by the framework and finite element paths.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// `A x` for a CSR matrix.
pub fn csr_mul<T: Scalar>(a: &CsrMatrix<T>, x: &DVector<T>) -> DVector<T> {
    assert_eq!(a.ncols(), x.len());
    let mut y = DVector::zeros(a.nrows());
    for (i, row) in a.row_iter().enumerate() {
        let mut acc = T::zero();
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            acc += v * x[j];
        }
        y[i] = acc;
    }
    y
}

/// `Aᵀ x` for a CSR matrix.
pub fn csr_tr_mul<T: Scalar>(a: &CsrMatrix<T>, x: &DVector<T>) -> DVector<T> {
    assert_eq!(a.nrows(), x.len());
    let mut y = DVector::zeros(a.ncols());
    for (i, row) in a.row_iter().enumerate() {
        let xi = x[i];
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            y[j] += v * xi;
        }
    }
    y
}

pub fn csc_mul<T: Scalar>(a: &CscMatrix<T>, x: &DVector<T>) -> DVector<T> {
    assert_eq!(a.ncols(), x.len());
    let mut y = DVector::zeros(a.nrows());
    for (j, col) in a.col_iter().enumerate() {
        let xj = x[j];
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            y[i] += v * xj;
        }
    }
    y
}

pub fn csr_to_dense<T: Scalar>(a: &CsrMatrix<T>) -> DMatrix<T> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, row) in a.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            d[(i, j)] += v;
        }
    }
    d
}

/// Keeps the listed columns of `a`, renumbered in the order given.
pub fn select_columns<T: Scalar>(a: &CsrMatrix<T>, columns: &[usize]) -> CsrMatrix<T> {
    let mut map = vec![usize::MAX; a.ncols()];
    for (new, &old) in columns.iter().enumerate() {
        map[old] = new;
    }
    let mut coo = CooMatrix::new(a.nrows(), columns.len());
    for (i, row) in a.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            if map[j] != usize::MAX {
                coo.push(i, map[j], v);
            }
        }
    }
    CsrMatrix::from(&coo)
}

/// Singular values of a dense matrix, descending.
pub fn singular_values<T: Scalar>(a: &DMatrix<T>) -> DVector<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let mut s = a.clone().svd(false, false).singular_values;
    s.as_mut_slice()
        .sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Number of singular values above `rel_tol × σ_max`.
pub fn numerical_rank<T: Scalar>(a: &DMatrix<T>, rel_tol: T) -> usize {
    let s = singular_values(a);
    let Some(&top) = s.iter().next() else {
        return 0;
    };
    if top == T::zero() {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Symmetric positive definite sparse matrix with its Cholesky factor.
///
/// Solves apply one step of iterative refinement against the stored matrix.
pub struct SpdSystem<T: Scalar> {
    matrix: CscMatrix<T>,
    factor: CscCholesky<T>,
}

impl<T: Scalar> SpdSystem<T> {
    /// Factors `matrix`; a non-positive pivot, or one below `1e-13` of the
    /// largest diagonal entry, is reported as [`Error::SingularStiffness`].
    pub fn factor(matrix: CscMatrix<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::SolveFailure("stiffness matrix is not square".into()));
        }
        let factor = CscCholesky::factor(&matrix).map_err(|_| Error::SingularStiffness)?;
        let mut max_diag = T::zero();
        for (j, col) in matrix.col_iter().enumerate() {
            for (&i, &v) in col.row_indices().iter().zip(col.values()) {
                if i == j {
                    max_diag = max_diag.max(v.abs());
                }
            }
        }
        let threshold = T::tol(1e-13) * max_diag;
        for (j, col) in factor.l().col_iter().enumerate() {
            // diagonal entry is stored first in each column of L
            let pivot = col
                .row_indices()
                .iter()
                .zip(col.values())
                .find(|(&i, _)| i == j)
                .map(|(_, &v)| v)
                .unwrap_or_else(T::zero);
            if pivot * pivot <= threshold {
                return Err(Error::SingularStiffness);
            }
        }
        Ok(Self { matrix, factor })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CscMatrix<T> {
        &self.matrix
    }

    pub fn solve(&self, rhs: &DVector<T>) -> DVector<T> {
        if rhs.is_empty() {
            return DVector::zeros(0);
        }
        let mut x: DVector<T> = self.factor.solve(rhs).column(0).into_owned();
        let residual = rhs - csc_mul(&self.matrix, &x);
        let correction = self.factor.solve(&residual);
        x += correction.column(0);
        x
    }
}

/// Builds a square symmetric CSC matrix from upper-triangle contributions
/// `(row ≤ col)`, mirroring the summed values so the result is exactly symmetric.
pub fn symmetric_from_upper<T: Scalar>(upper: &CooMatrix<T>) -> CscMatrix<T> {
    let summed = CscMatrix::from(upper);
    let n = upper.nrows();
    let mut full = CooMatrix::new(n, n);
    for (j, col) in summed.col_iter().enumerate() {
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            full.push(i, j, v);
            if i != j {
                full.push(j, i, v);
            }
        }
    }
    CscMatrix::from(&full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rank_of_rank_deficient_matrix() {
        let a = dmatrix![1.0, 2.0, 3.0; 2.0, 4.0, 6.0; 0.0, 1.0, 1.0];
        assert_eq!(numerical_rank(&a, 1e-9), 2);
        assert_eq!(numerical_rank(&DMatrix::<f64>::zeros(3, 2), 1e-9), 0);
    }

    #[test]
    fn spd_solve_and_singular_detection() {
        let mut coo = CooMatrix::<f64>::new(2, 2);
        coo.push(0, 0, 4.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 1, 3.0);
        let k = symmetric_from_upper(&coo);
        let sys = SpdSystem::factor(k).unwrap();
        let x = sys.solve(&DVector::from_vec(vec![1.0, 2.0]));
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);

        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 0, 1.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 1, 1.0);
        assert!(matches!(
            SpdSystem::factor(symmetric_from_upper(&coo)),
            Err(Error::SingularStiffness)
        ));
    }

    #[test]
    fn transpose_product_matches_dense() {
        let mut coo = CooMatrix::new(2, 3);
        coo.push(0, 0, 1.0);
        coo.push(0, 2, -2.0);
        coo.push(1, 1, 3.0);
        let a = CsrMatrix::from(&coo);
        let d = csr_to_dense(&a);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(csr_tr_mul(&a, &x), d.transpose() * &x);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(csr_mul(&a, &y), &d * &y);
        let sel = select_columns(&a, &[2, 0]);
        assert_eq!(csr_to_dense(&sel), dmatrix![-2.0, 1.0; 0.0, 0.0]);
    }
}
