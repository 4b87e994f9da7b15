//! Thin QR by Householder reflections.
//!
//! The factor keeps the reflectors in compact form so that `Q * M` and
//! `Qᵀ * B` can be applied without forming `Q`. Signs are normalized so the
//! diagonal of `R` is nonnegative; the same input always produces the same
//! bits.

use rayon::prelude::*;

use super::{dot, DenseMatrix, LinalgError, Result};

pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    // Row j holds column j of the working matrix: entries above j are R,
    // entries from j on are the reflector v_j.
    work: DenseMatrix,
    beta: Vec<f64>,
    rdiag: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let (n, k) = a.shape();
        if n < k {
            return Err(LinalgError::WideMatrix {
                op: "qr_thin",
                rows: n,
                cols: k,
            });
        }
        let mut work = a.transpose();
        let mut beta = vec![0.0; k];
        let mut rdiag = vec![0.0; k];
        let data = work.as_mut_slice();
        for j in 0..k {
            let (head, tail) = data.split_at_mut((j + 1) * n);
            let v = &mut head[j * n + j..(j + 1) * n];
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = v[0];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            v[0] = x0 - alpha;
            beta[j] = 2.0 / dot(v, v);
            rdiag[j] = alpha;
            let v: &[f64] = v;
            let b = beta[j];
            tail.par_chunks_mut(n).for_each(|col| {
                let seg = &mut col[j..];
                let s = b * dot(v, seg);
                for (y, &vi) in seg.iter_mut().zip(v) {
                    *y -= s * vi;
                }
            });
        }
        Ok(HouseholderQr {
            rows: n,
            cols: k,
            work,
            beta,
            rdiag,
        })
    }

    fn sign(&self, j: usize) -> f64 {
        if self.rdiag[j] < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    fn reflector(&self, j: usize) -> &[f64] {
        &self.work.row(j)[j..]
    }

    /// Upper-triangular `R` (k x k) with nonnegative diagonal.
    pub fn r(&self) -> DenseMatrix {
        let k = self.cols;
        let mut r = DenseMatrix::zeros(k, k);
        for i in 0..k {
            let d = self.sign(i);
            r.set(i, i, d * self.rdiag[i]);
            for c in i + 1..k {
                r.set(i, c, d * self.work.get(c, i));
            }
        }
        r
    }

    /// Absolute values of the diagonal of `R`.
    pub fn r_diag_abs(&self) -> Vec<f64> {
        self.rdiag.iter().map(|d| d.abs()).collect()
    }

    /// `Q * m` for a `k x c` matrix `m`, giving `n x c`.
    pub fn apply_q(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        let (n, k) = (self.rows, self.cols);
        if m.rows() != k {
            return Err(LinalgError::DimensionMismatch {
                op: "qr apply_q",
                left: (n, k),
                right: m.shape(),
            });
        }
        let c = m.cols();
        // Column-major n x c buffer holding [D m; 0].
        let mut y = DenseMatrix::zeros(c, n);
        for i in 0..k {
            let d = self.sign(i);
            for col in 0..c {
                y.set(col, i, d * m.get(i, col));
            }
        }
        y.as_mut_slice().par_chunks_mut(n).for_each(|col| {
            for j in (0..k).rev() {
                if self.beta[j] == 0.0 {
                    continue;
                }
                let v = self.reflector(j);
                let seg = &mut col[j..];
                let s = self.beta[j] * dot(v, seg);
                for (yv, &vi) in seg.iter_mut().zip(v) {
                    *yv -= s * vi;
                }
            }
        });
        Ok(y.transpose())
    }

    /// `Qᵀ * b` for an `n x c` matrix `b`, giving `k x c`.
    pub fn apply_qt(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let (n, k) = (self.rows, self.cols);
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "qr apply_qt",
                left: (n, k),
                right: b.shape(),
            });
        }
        let mut y = b.transpose();
        y.as_mut_slice().par_chunks_mut(n.max(1)).for_each(|col| {
            for j in 0..k {
                if self.beta[j] == 0.0 {
                    continue;
                }
                let v = self.reflector(j);
                let seg = &mut col[j..];
                let s = self.beta[j] * dot(v, seg);
                for (yv, &vi) in seg.iter_mut().zip(v) {
                    *yv -= s * vi;
                }
            }
        });
        let mut out = DenseMatrix::zeros(k, b.cols());
        for i in 0..k {
            let d = self.sign(i);
            for col in 0..b.cols() {
                out.set(i, col, d * y.get(col, i));
            }
        }
        Ok(out)
    }

    /// Thin orthonormal factor `Q` (n x k).
    pub fn thin_q(&self) -> DenseMatrix {
        self.apply_q(&DenseMatrix::identity(self.cols))
            .expect("identity has matching shape")
    }
}

/// Thin QR of a tall matrix: `A = Q R`, `QᵀQ = I`, `R` upper triangular
/// with nonnegative diagonal.
pub fn qr_thin(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let f = HouseholderQr::new(a)?;
    Ok((f.thin_q(), f.r()))
}

/// Solves `R x = b` for upper-triangular `R`, column by column of `b`.
pub(crate) fn back_substitute(r: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let k = r.rows();
    let mut x = b.clone();
    for col in 0..b.cols() {
        for i in (0..k).rev() {
            let mut s = x.get(i, col);
            for j in i + 1..k {
                s -= r.get(i, j) * x.get(j, col);
            }
            x.set(i, col, s / r.get(i, i));
        }
    }
    x
}
