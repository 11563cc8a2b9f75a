//! Row-major dense matrices.
//!
//! `DenseMatrix` is the carrier for every 2-D quantity in the crate: input
//! batches, hidden-layer activations, the autocorrelation matrix and the
//! output weights. Constructors that accept raw data reject non-finite
//! entries; arithmetic assumes finite inputs and does not re-check.

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("{op}: incompatible shapes {lhs_rows}x{lhs_cols} and {rhs_rows}x{rhs_cols}")]
    ShapeMismatch {
        op: &'static str,
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("data length {len} does not match {rows}x{cols}")]
    BadLength { len: usize, rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Row-major dense matrix over a [`Scalar`] element type.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: std::fmt::Debug> std::fmt::Debug for DenseMatrix<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.rows, self.cols)?;
        if self.rows * self.cols <= 36 {
            for i in 0..self.rows {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                write!(f, "\n  {row:?}")?;
            }
        }
        Ok(())
    }
}

/// Row panel size for the cache-blocked product kernels.
const K_PANEL: usize = 192;
/// Below this flop count the parallel kernels run single-threaded.
const PAR_FLOPS: usize = 1 << 20;

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    /// Builds from row-major data, validating length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::BadLength { len: data.len(), rows, cols });
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite {
                    row: if cols == 0 { 0 } else { idx / cols },
                    col: if cols == 0 { 0 } else { idx % cols },
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows (test and loader convenience).
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(MatrixError::BadLength { len: row.len(), rows: r, cols: c });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    /// Fills entry (i, j) with `f(i, j)`. No finiteness check.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    /// Splits the backing storage at a flat index; handy for borrowing two
    /// disjoint row ranges mutably.
    pub fn data_split_mut(&mut self, at: usize) -> (&mut [F], &mut [F]) {
        self.data.split_at_mut(at)
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            let src = self.row(i);
            for (j, &v) in src.iter().enumerate() {
                out.data[j * self.rows + i] = v;
            }
        }
        out
    }

    /// `self * rhs`, cache-blocked over panels of `rhs` rows.
    pub fn matmul(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if self.cols != rhs.rows {
            return Err(self.shape_err("matmul", rhs));
        }
        let (r, k, c) = (self.rows, self.cols, rhs.cols);
        let mut out = Self::zeros(r, c);
        let parallel = r * k * c >= PAR_FLOPS;
        for k0 in (0..k).step_by(K_PANEL) {
            let k1 = (k0 + K_PANEL).min(k);
            let body = |(i, orow): (usize, &mut [F])| {
                let arow = &self.data[i * k..(i + 1) * k];
                for kk in k0..k1 {
                    let aik = arow[kk];
                    if aik != F::zero() {
                        let brow = &rhs.data[kk * c..(kk + 1) * c];
                        for (o, &b) in orow.iter_mut().zip(brow) {
                            *o += aik * b;
                        }
                    }
                }
            };
            if parallel {
                out.data.par_chunks_mut(c).enumerate().for_each(body);
            } else {
                out.data.chunks_mut(c).enumerate().for_each(body);
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᵀ * self` (an `n×n` result for an `m×n` input).
    ///
    /// Accumulates the upper triangle only and mirrors it, so the result is
    /// exactly symmetric.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        self.accumulate_gram(&mut out);
        out
    }

    /// `out += selfᵀ * self` keeping `out` exactly symmetric.
    pub fn accumulate_gram(&self, out: &mut Self) {
        assert_eq!(out.shape(), (self.cols, self.cols), "gram accumulator shape");
        let (m, n) = (self.rows, self.cols);
        let mut upper = vec![F::zero(); n * n];
        let parallel = m * n * n / 2 >= PAR_FLOPS;
        for k0 in (0..m).step_by(K_PANEL) {
            let k1 = (k0 + K_PANEL).min(m);
            let body = |(i, urow): (usize, &mut [F])| {
                for kk in k0..k1 {
                    let arow = &self.data[kk * n..(kk + 1) * n];
                    let aki = arow[i];
                    if aki != F::zero() {
                        for (u, &a) in urow[i..].iter_mut().zip(&arow[i..]) {
                            *u += aki * a;
                        }
                    }
                }
            };
            if parallel {
                upper.par_chunks_mut(n).enumerate().for_each(body);
            } else {
                upper.chunks_mut(n).enumerate().for_each(body);
            }
        }
        for i in 0..n {
            for j in i..n {
                let v = upper[i * n + j];
                out.data[i * n + j] += v;
                if j != i {
                    out.data[j * n + i] += v;
                }
            }
        }
    }

    /// `selfᵀ * rhs` without materializing the transpose.
    pub fn t_mul(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if self.rows != rhs.rows {
            return Err(self.shape_err("t_mul", rhs));
        }
        let (m, n, c) = (self.rows, self.cols, rhs.cols);
        let mut out = Self::zeros(n, c);
        for k in 0..m {
            let arow = &self.data[k * n..(k + 1) * n];
            let brow = &rhs.data[k * c..(k + 1) * c];
            for (i, &aki) in arow.iter().enumerate() {
                if aki != F::zero() {
                    let orow = &mut out.data[i * c..(i + 1) * c];
                    for (o, &b) in orow.iter_mut().zip(brow) {
                        *o += aki * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, MatrixError> {
        let mut out = self.clone();
        out.add_assign(rhs)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, rhs: &Self) -> Result<(), MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(self.shape_err("add", rhs));
        }
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(self.shape_err("sub", rhs));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, s: F) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = *v * s;
        }
        out
    }

    /// Adds `v` to each diagonal entry (square matrices).
    pub fn add_diag(&mut self, v: F) {
        debug_assert!(self.is_square());
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] += v;
        }
    }

    /// Replaces the matrix with `(M + Mᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        debug_assert!(self.is_square());
        let n = self.rows;
        let half = F::from_f64_lossy(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.data[i * n + j];
                let b = self.data[j * n + i];
                let m = (a + b) * half;
                self.data[i * n + j] = m;
                self.data[j * n + i] = m;
            }
        }
    }

    pub fn frobenius_norm(&self) -> F {
        self.data.iter().map(|&v| v * v).sum::<F>().sqrt()
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Largest absolute deviation from symmetry, `max |M - Mᵀ|`.
    pub fn asymmetry(&self) -> F {
        debug_assert!(self.is_square());
        let n = self.rows;
        let mut worst = F::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    /// Copies `src` into this matrix with its top-left corner at (r0, c0).
    pub fn copy_block(&mut self, r0: usize, c0: usize, src: &Self) {
        assert!(r0 + src.rows <= self.rows && c0 + src.cols <= self.cols, "block out of range");
        for i in 0..src.rows {
            let dst =
                &mut self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + src.cols];
            dst.copy_from_slice(src.row(i));
        }
    }

    /// Stacks `below` under `self`.
    pub fn vstack(&self, below: &Self) -> Result<Self, MatrixError> {
        if self.cols != below.cols {
            return Err(self.shape_err("vstack", below));
        }
        let mut out = Self::zeros(self.rows + below.rows, self.cols);
        out.copy_block(0, 0, self);
        out.copy_block(self.rows, 0, below);
        Ok(out)
    }

    /// Stacks `right` beside `self`.
    pub fn hstack(&self, right: &Self) -> Result<Self, MatrixError> {
        if self.rows != right.rows {
            return Err(self.shape_err("hstack", right));
        }
        let mut out = Self::zeros(self.rows, self.cols + right.cols);
        out.copy_block(0, 0, self);
        out.copy_block(0, self.cols, right);
        Ok(out)
    }

    fn shape_err(&self, op: &'static str, rhs: &Self) -> MatrixError {
        MatrixError::ShapeMismatch {
            op,
            lhs_rows: self.rows,
            lhs_cols: self.cols,
            rhs_rows: rhs.rows,
            rhs_cols: rhs.cols,
        }
    }
}
