//! Bridge to `faer` for dense decompositions and the sparse LU.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::traits::ComplexField;
use faer::Mat;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, Scalar};

pub(crate) trait Field: Scalar + ComplexField<Real = f64> {}
impl<T: Scalar + ComplexField<Real = f64>> Field for T {}

pub(crate) fn to_dense<T: Field>(m: &CsrMatrix<T>) -> Mat<T> {
    let mut out = Mat::<T>::zeros(m.n_rows(), m.n_cols());
    for (i, j, v) in m.iter() {
        out[(i, j)] = v;
    }
    out
}

/// All singular values in decreasing order.
pub(crate) fn singular_values_dense<T: Field>(m: &Mat<T>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s = m
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("dense SVD failed: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

pub(crate) fn singular_values<T: Field>(m: &CsrMatrix<T>) -> Result<Vec<f64>> {
    singular_values_dense(&to_dense(m))
}

/// Spectral norm by dense SVD.
pub(crate) fn norm2<T: Field>(m: &CsrMatrix<T>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Eigenvalues and eigenvectors (columns) of a small symmetric matrix.
pub(crate) fn symmetric_eigen(t: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = t
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("symmetric eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..t.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Solves `m x = rhs` by dense LU with partial pivoting.
pub(crate) fn dense_solve(m: &CsrMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    check_square(m, rhs.len())?;
    let lu = to_dense(m).partial_piv_lu();
    let mut b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    lu.solve_in_place(b.as_mut());
    collect_column(&b)
}

/// Sparse LU factorization of a square real matrix.
pub(crate) struct SparseLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub(crate) fn new(m: &CsrMatrix<f64>) -> Result<Self> {
        check_square(m, m.n_rows())?;
        let triplets: Vec<Triplet<usize, usize, f64>> =
            m.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(m.n_rows(), m.n_cols(), &triplets)
            .map_err(|e| Error::LinearAlgebra(format!("sparse conversion failed: {e:?}")))?;
        // faer panics on an exactly zero pivot instead of reporting it.
        let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| csc.sp_lu()))
            .map_err(|_| Error::LinearAlgebra("sparse LU hit an exactly zero pivot".into()))?
            .map_err(|e| Error::LinearAlgebra(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { lu, n: m.n_rows() })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        collect_column(&b)
    }

    pub(crate) fn solve_transpose(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_transpose_in_place(b.as_mut());
        collect_column(&b)
    }
}

fn check_square(m: &CsrMatrix<f64>, rhs_len: usize) -> Result<()> {
    if !m.is_square() || m.n_rows() != rhs_len {
        return Err(Error::invalid(format!(
            "solve needs a square matrix and matching right-hand side, got {}x{} and {rhs_len}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    Ok(())
}

fn collect_column(b: &Mat<f64>) -> Result<Vec<f64>> {
    let x: Vec<f64> = (0..b.nrows()).map(|i| b[(i, 0)]).collect();
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::LinearAlgebra("solve produced non-finite values (singular matrix?)".into()))
    }
}
