//! Compressed-row sparse matrices used for every assembled operator.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field of matrix entries: `f64` for the physical systems, `Complex64` for
/// the Fourier-symbol matrices.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const IS_COMPLEX: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn modulus(self) -> f64;
    fn real(self) -> f64;
    fn imag(self) -> f64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn real(self) -> f64 {
        self
    }
    fn imag(self) -> f64 {
        0.0
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn real(self) -> f64 {
        self.re
    }
    fn imag(self) -> f64 {
        self.im
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut t = TripletBuilder::new(n, n);
        for (i, &d) in diag.iter().enumerate() {
            t.push(i, i, d);
        }
        t.build()
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut t = TripletBuilder::new(n_rows, n_cols);
        for (i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::invalid(format!(
                    "triplet ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            t.push(i, j, v);
        }
        Ok(t.build())
    }

    /// Dense row-major input, zeros skipped.
    pub fn from_dense_rows(rows: &[Vec<T>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut t = TripletBuilder::new(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                t.push(i, j, v);
            }
        }
        t.build()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => T::zero(),
        }
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Largest number of stored entries in any row or any column.
    pub fn sparsity(&self) -> usize {
        let max_row = (0..self.n_rows).map(|i| self.row_nnz(i)).max().unwrap_or(0);
        let mut col_counts = vec![0usize; self.n_cols];
        for &j in &self.col_idx {
            col_counts[j] += 1;
        }
        max_row.max(col_counts.into_iter().max().unwrap_or(0))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        (0..self.n_rows)
            .map(|i| {
                self.row(i).fold(T::zero(), |acc, (j, v)| acc + v * x[j])
            })
            .collect()
    }

    /// `self^H x` (plain transpose for real matrices).
    pub fn adjoint_matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_rows, "adjoint matvec dimension mismatch");
        let mut y = vec![T::zero(); self.n_cols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v.conj() * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut t = TripletBuilder::new(self.n_cols, self.n_rows);
        for (i, j, v) in self.iter() {
            t.push(j, i, v);
        }
        t.build()
    }

    pub fn adjoint(&self) -> Self {
        let mut t = TripletBuilder::new(self.n_cols, self.n_rows);
        for (i, j, v) in self.iter() {
            t.push(j, i, v.conj());
        }
        t.build()
    }

    pub fn scale(&self, alpha: T) -> Self {
        let mut t = TripletBuilder::new(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter() {
            t.push(i, j, alpha * v);
        }
        t.build()
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert_eq!(
            (self.n_rows, self.n_cols),
            (other.n_rows, other.n_cols),
            "lin_comb shape mismatch"
        );
        let mut t = TripletBuilder::new(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter() {
            t.push(i, j, alpha * v);
        }
        for (i, j, v) in other.iter() {
            t.push(i, j, beta * v);
        }
        t.build()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin_comb(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(T::one(), other, -T::one())
    }

    /// Sparse product `self * other` (row-by-row Gustavson).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows, "matmul dimension mismatch");
        let mut acc = vec![T::zero(); other.n_cols];
        let mut mark = vec![usize::MAX; other.n_cols];
        let mut touched = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n_rows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = T::zero();
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != T::zero() {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = TripletBuilder::new(self.n_rows * other.n_rows, self.n_cols * other.n_cols);
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                t.push(i * other.n_rows + k, j * other.n_cols + l, a * b);
            }
        }
        t.build()
    }

    /// Block-diagonal matrix with the given square-or-rectangular blocks.
    pub fn block_diag(blocks: &[Self]) -> Self {
        let n_rows = blocks.iter().map(|b| b.n_rows).sum();
        let n_cols = blocks.iter().map(|b| b.n_cols).sum();
        let mut t = TripletBuilder::new(n_rows, n_cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            t.add_block(r0, c0, b, T::one());
            r0 += b.n_rows;
            c0 += b.n_cols;
        }
        t.build()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        let mut t = TripletBuilder::new(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter() {
            t.push(i, j, f(v));
        }
        t.build()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for (i, j, v) in self.iter() {
            d[i][j] = v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, v)| v.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.n_cols];
        for (_, j, v) in self.iter() {
            sums[j] += v.modulus();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| {
                let m = v.modulus();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Accumulates triplets and compresses them into a [`CsrMatrix`].
#[derive(Debug, Clone)]
pub struct TripletBuilder<T> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        TripletBuilder {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        if v != T::zero() {
            self.entries.push((i, j, v));
        }
    }

    /// Adds `scale * block` with its top-left corner at `(row0, col0)`.
    pub fn add_block(&mut self, row0: usize, col0: usize, block: &CsrMatrix<T>, scale: T) {
        assert!(
            row0 + block.n_rows <= self.n_rows && col0 + block.n_cols <= self.n_cols,
            "block does not fit"
        );
        for (i, j, v) in block.iter() {
            self.push(row0 + i, col0 + j, scale * v);
        }
    }

    pub fn build(mut self) -> CsrMatrix<T> {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                rows.push(i);
                last = Some((i, j));
            }
        }
        // Drop entries that cancelled to exact zero.
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((i, j), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != T::zero() {
                row_ptr[i + 1] += 1;
                keep_cols.push(j);
                keep_vals.push(v);
            }
        }
        for i in 0..self.n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx: keep_cols,
            values: keep_vals,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> CsrMatrix<f64> {
        CsrMatrix::from_dense_rows(&[
            vec![1.0, 0.0, 2.0],
            vec![0.0, 0.0, 0.0],
            vec![-1.0, 3.0, 0.0],
        ])
    }

    #[test]
    fn duplicates_sum_and_zeros_dropped() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 0, -1.0), (0, 0, 0.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(CsrMatrix::<f64>::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn column_indices_sorted() {
        let m = CsrMatrix::from_triplets(1, 4, vec![(0, 3, 1.0), (0, 0, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(m.col_idx(), &[0, 2, 3]);
    }

    #[test]
    fn sparsity_counts_rows_and_columns() {
        let m = small();
        assert_eq!(m.sparsity(), 2);
        let col_heavy =
            CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0)]).unwrap();
        assert_eq!(col_heavy.sparsity(), 3);
    }

    #[test]
    fn kron_with_identity() {
        let a = CsrMatrix::from_dense_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let k = CsrMatrix::<f64>::identity(2).kron(&a);
        assert_eq!(k.get(2, 2), 1.0);
        assert_eq!(k.get(3, 2), 3.0);
        assert_eq!(k.get(0, 2), 0.0);
        let k2 = a.kron(&CsrMatrix::identity(2));
        assert_eq!(k2.get(0, 2), 2.0);
        assert_eq!(k2.get(3, 1), 3.0);
    }

    #[test]
    fn adjoint_of_complex() {
        let m = CsrMatrix::from_dense_rows(&[vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, 1.0)]]);
        let y = m.adjoint_matvec(&[Complex64::new(1.0, 0.0)]);
        assert_eq!(y, vec![Complex64::new(1.0, -2.0), Complex64::new(0.0, -1.0)]);
        assert_eq!(m.adjoint().get(1, 0), Complex64::new(0.0, -1.0));
    }

    fn dense_strategy(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![Just(0.0), -3.0..3.0f64], n),
            n,
        )
    }

    fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let m = b[0].len();
        let mut c = vec![vec![0.0; m]; n];
        for i in 0..n {
            for k in 0..b.len() {
                for j in 0..m {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    proptest! {
        #[test]
        fn matmul_matches_dense(a in dense_strategy(5), b in dense_strategy(5)) {
            let prod = CsrMatrix::from_dense_rows(&a).matmul(&CsrMatrix::from_dense_rows(&b));
            let expect = dense_mul(&a, &b);
            for i in 0..5 {
                for j in 0..5 {
                    prop_assert!((prod.get(i, j) - expect[i][j]).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn transpose_matvec_consistent(a in dense_strategy(4), x in prop::collection::vec(-1.0..1.0f64, 4)) {
            let m = CsrMatrix::from_dense_rows(&a);
            let lhs = m.adjoint_matvec(&x);
            let rhs = m.transpose().matvec(&x);
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert!((l - r).abs() <= 1e-12);
            }
        }
    }
}
