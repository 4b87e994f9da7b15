//! Dense real and complex linear-algebra kernels.
//!
//! Storage is row-major throughout: `data[i * cols + j]` holds `A[i, j]`.
//! Factorizations live in submodules ([`qr`], [`svd`], [`eig`],
//! [`lstsq`]); the Gaussian test-matrix generator lives in [`rng`].

pub mod eig;
pub mod footprint;
pub mod lstsq;
pub mod qr;
pub mod rng;
pub mod svd;

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

pub use eig::{eig_dense, EigResult};
pub use lstsq::{lstsq, pinv_apply, pinv_apply_real, LstsqSolution, PinvSolution};
pub use qr::{qr_thin, HouseholderQr};
pub use rng::{gaussian_matrix, RngStream};
pub use svd::{svd_thin, SvdResult};

/// Errors raised by the dense kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: left is {left:?}, right is {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("data length {got} does not match a {rows}x{cols} matrix")]
    InvalidData { rows: usize, cols: usize, got: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{op} requires rows >= cols, got {rows}x{cols}")]
    WideMatrix {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("{op} did not converge within {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Row-major real matrix.
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        footprint::acquire(data.len() * 8);
        DenseMatrix { rows, cols, data }
    }

    /// Wraps row-major `data`. Fails if the length is wrong.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidData {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self::from_parts(rows, cols, data))
    }

    /// Like [`DenseMatrix::new`] but also rejects NaN and infinities.
    pub fn new_finite(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let m = Self::new(rows, cols, data)?;
        m.check_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, data)
    }

    /// Builds a matrix from row slices.
    ///
    /// # Panics
    /// Panics if the rows have different lengths.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "row {i} has {} entries, expected {ncols}", row.len());
            data.extend_from_slice(row);
        }
        Self::from_parts(rows.len(), ncols, data)
    }

    /// Builds a matrix whose columns are the given slices.
    pub fn from_columns(columns: &[&[f64]]) -> Self {
        let nrows = columns.first().map_or(0, |c| c.len());
        let ncols = columns.len();
        Self::from_fn(nrows, ncols, |i, j| columns[j][i])
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(mut self) -> Vec<f64> {
        let data = std::mem::take(&mut self.data);
        footprint::release(data.len() * 8);
        data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    /// Copy of the contiguous column block `range`.
    pub fn columns(&self, range: Range<usize>) -> DenseMatrix {
        assert!(range.end <= self.cols, "column range {range:?} out of bounds for {} columns", self.cols);
        let width = range.len();
        let mut data = Vec::with_capacity(self.rows * width);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[range.clone()]);
        }
        Self::from_parts(self.rows, width, data)
    }

    /// Copy of the leading `count` rows.
    pub fn top_rows(&self, count: usize) -> DenseMatrix {
        assert!(count <= self.rows);
        Self::from_parts(count, self.cols, self.data[..count * self.cols].to_vec())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let (r, c) = self.shape();
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            let row = self.row(i);
            for (j, &v) in row.iter().enumerate() {
                data[j * r + i] = v;
            }
        }
        Self::from_parts(c, r, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        Self::from_parts(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_shape("sub", other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self::from_parts(self.rows, self.cols, data))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_shape("add", other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self::from_parts(self.rows, self.cols, data))
    }

    fn same_shape(&self, op: &'static str, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(idx) => Err(LinalgError::NonFinite {
                row: idx / self.cols.max(1),
                col: idx % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, k) = (self.rows, other.cols);
        let mut out = DenseMatrix::zeros(n, k);
        if k == 0 {
            return Ok(out);
        }
        out.data.par_chunks_mut(k).enumerate().for_each(|(i, crow)| {
            for (p, &a) in self.row(i).iter().enumerate() {
                for (c, &b) in crow.iter_mut().zip(other.row(p)) {
                    *c += a * b;
                }
            }
        });
        Ok(out)
    }

    /// `selfᵀ * other` without forming the transpose.
    ///
    /// The reduction over rows is split into fixed-size blocks that are summed
    /// in block order, so the result does not depend on the thread count.
    pub fn matmul_transa(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul_transa",
                left: self.shape(),
                right: other.shape(),
            });
        }
        const BLOCK: usize = 4096;
        let (k, m) = (self.cols, other.cols);
        let partials: Vec<Vec<f64>> = (0..self.rows.div_ceil(BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut acc = vec![0.0; k * m];
                for l in b * BLOCK..((b + 1) * BLOCK).min(self.rows) {
                    let brow = other.row(l);
                    for (a, &x) in self.row(l).iter().enumerate() {
                        for (c, &y) in acc[a * m..(a + 1) * m].iter_mut().zip(brow) {
                            *c += x * y;
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = DenseMatrix::zeros(k, m);
        for part in partials {
            for (c, p) in out.data.iter_mut().zip(part) {
                *c += p;
            }
        }
        Ok(out)
    }

    /// `self * otherᵀ`.
    pub fn matmul_transb(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "matmul_transb",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, m) = (self.rows, other.rows);
        let mut out = DenseMatrix::zeros(n, m);
        if m == 0 {
            return Ok(out);
        }
        out.data.par_chunks_mut(m).enumerate().for_each(|(i, crow)| {
            let arow = self.row(i);
            for (j, c) in crow.iter_mut().enumerate() {
                *c = dot(arow, other.row(j));
            }
        });
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Real times complex product, computed as two real products.
    pub fn matmul_complex(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (re, im) = other.split();
        let pr = self.matmul(&re)?;
        let pi = self.matmul(&im)?;
        Ok(ComplexMatrix::from_re_im(&pr, &pi))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }
}

impl Clone for DenseMatrix {
    fn clone(&self) -> Self {
        Self::from_parts(self.rows, self.cols, self.data.clone())
    }
}

impl Drop for DenseMatrix {
    fn drop(&mut self) {
        footprint::release(self.data.len() * 8);
    }
}

impl PartialEq for DenseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.data == other.data
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

/// Row-major complex matrix; each entry is an interleaved `(re, im)` pair.
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    fn from_parts(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        footprint::acquire(data.len() * 16);
        ComplexMatrix { rows, cols, data }
    }

    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidData {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self::from_parts(rows, cols, data))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, data)
    }

    pub fn from_re_im(re: &DenseMatrix, im: &DenseMatrix) -> Self {
        assert_eq!(re.shape(), im.shape());
        let data = re
            .as_slice()
            .iter()
            .zip(im.as_slice())
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        Self::from_parts(re.rows, re.cols, data)
    }

    /// Real and imaginary parts as two real matrices.
    pub fn split(&self) -> (DenseMatrix, DenseMatrix) {
        let re = self.data.iter().map(|z| z.re).collect();
        let im = self.data.iter().map(|z| z.im).collect();
        (
            DenseMatrix::from_parts(self.rows, self.cols, re),
            DenseMatrix::from_parts(self.rows, self.cols, im),
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Copy keeping only the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> ComplexMatrix {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "complex matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, k) = (self.rows, other.cols);
        let mut out = ComplexMatrix::zeros(n, k);
        for i in 0..n {
            for p in 0..self.cols {
                let a = self.get(i, p);
                for j in 0..k {
                    out.data[i * k + j] += a * other.data[p * k + j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != x.len() {
            return Err(LinalgError::DimensionMismatch {
                op: "complex matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }
}

impl Clone for ComplexMatrix {
    fn clone(&self) -> Self {
        Self::from_parts(self.rows, self.cols, self.data.clone())
    }
}

impl Drop for ComplexMatrix {
    fn drop(&mut self) {
        footprint::release(self.data.len() * 16);
    }
}

impl PartialEq for ComplexMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.data == other.data
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{}", self.rows, self.cols)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cnorm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            let mut s = 0.0;
            for p in 0..a.cols() {
                s += a.get(i, p) * b.get(p, j);
            }
            s
        })
    }

    fn pseudo(rows: usize, cols: usize, salt: u64) -> DenseMatrix {
        let mut stream = RngStream::named(salt, "test");
        gaussian_matrix(rows, cols, &mut stream)
    }

    #[test]
    fn identity_is_neutral() {
        let a = pseudo(4, 6, 1);
        assert_eq!(a.matmul(&DenseMatrix::identity(6)).unwrap(), a);
        assert_eq!(DenseMatrix::identity(4).matmul(&a).unwrap(), a);
    }

    #[test]
    fn products_match_triple_loop() {
        let a = pseudo(7, 5, 2);
        let b = pseudo(5, 3, 3);
        let want = naive(&a, &b);
        let got = a.matmul(&b).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() < 1e-13);

        let at = a.transpose();
        let got = at.matmul_transa(&b).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() < 1e-13);

        let bt = b.transpose();
        let got = a.matmul_transb(&bt).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn transa_blocks_cover_tall_inputs() {
        let a = pseudo(9000, 3, 4);
        let b = pseudo(9000, 2, 5);
        let want = naive(&a.transpose(), &b);
        let got = a.matmul_transa(&b).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn associativity_on_small_shapes() {
        let a = pseudo(3, 4, 6);
        let b = pseudo(4, 5, 7);
        let c = pseudo(5, 2, 8);
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        assert!(left.sub(&right).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(LinalgError::DimensionMismatch { .. })));
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            DenseMatrix::new_finite(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn complex_real_product_matches_direct() {
        let u = pseudo(6, 3, 9);
        let w = ComplexMatrix::from_re_im(&pseudo(3, 2, 10), &pseudo(3, 2, 11));
        let got = u.matmul_complex(&w).unwrap();
        let want = u.to_complex().matmul(&w).unwrap();
        for (a, b) in got.as_slice().iter().zip(want.as_slice()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn footprint_tracks_live_matrices() {
        footprint::reset_peak();
        let base = footprint::live_bytes();
        {
            let _a = DenseMatrix::zeros(10, 10);
            let _b = ComplexMatrix::zeros(2, 2);
            assert_eq!(footprint::live_bytes(), base + 800 + 64);
        }
        assert_eq!(footprint::live_bytes(), base);
        assert!(footprint::peak_bytes() >= base + 864);
    }
}
