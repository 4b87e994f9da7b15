//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Tall inputs are first reduced with a Householder QR so the rotations act
//! on the small square triangular factor; wide inputs are handled through
//! the transpose. Singular values come out sorted descending, and each left
//! singular vector is signed so its first significant entry is positive
//! (the matching right vector is flipped with it).

use super::qr::HouseholderQr;
use super::{dot, DenseMatrix, LinalgError, Result};

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, `n x q`.
    pub u: DenseMatrix,
    /// Singular values, descending, length `q`.
    pub s: Vec<f64>,
    /// Right singular vectors, `m x q`.
    pub v: DenseMatrix,
}

impl SvdResult {
    /// Leading `r` triplets.
    pub fn truncate(&self, r: usize) -> SvdResult {
        let r = r.min(self.s.len());
        SvdResult {
            u: self.u.columns(0..r),
            s: self.s[..r].to_vec(),
            v: self.v.columns(0..r),
        }
    }

    /// `U diag(S) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, &s) in self.s.iter().enumerate() {
                let v = us.get(i, j) * s;
                us.set(i, j, v);
            }
        }
        us.matmul_transb(&self.v).expect("factor shapes agree")
    }
}

/// Thin SVD with `q = min(n, m)` triplets.
pub fn svd_thin(a: &DenseMatrix) -> Result<SvdResult> {
    a.check_finite()?;
    let (n, m) = a.shape();
    if n < m {
        let t = svd_thin(&a.transpose())?;
        return Ok(fix_signs(SvdResult {
            u: t.v,
            s: t.s,
            v: t.u,
        }));
    }
    if m == 0 {
        return Ok(SvdResult {
            u: DenseMatrix::zeros(n, 0),
            s: Vec::new(),
            v: DenseMatrix::zeros(0, 0),
        });
    }
    let cap = 100 * m;
    let out = if n > m {
        let qr = HouseholderQr::new(a)?;
        let (ur, s, v) = jacobi(&qr.r(), cap)?;
        let u = qr.apply_q(&ur)?;
        SvdResult { u, s, v }
    } else {
        let (u, s, v) = jacobi(a, cap)?;
        SvdResult { u, s, v }
    };
    Ok(fix_signs(out))
}

/// One-sided Jacobi on a square matrix. Returns `(U, S, V)` with `S` sorted.
fn jacobi(a: &DenseMatrix, max_sweeps: usize) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let m = a.cols();
    let n = a.rows();
    // Column-major working copies: row j of `w` is column j of A.
    let mut w = a.transpose();
    let mut v = DenseMatrix::identity(m);
    let mut norms: Vec<f64> = (0..m).map(|j| dot(w.row(j), w.row(j))).collect();
    // Rounding in a length-n dot product leaves |gamma| near eps * n.
    let tol = f64::EPSILON * n.max(1) as f64;
    // Columns this small are rounding noise; rotating them against large
    // columns never settles.
    let floor = {
        let total: f64 = norms.iter().sum();
        (tol * total.sqrt()).powi(2)
    };

    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = norms[p];
                let beta = norms[q];
                let gamma = dot(w.row(p), w.row(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w.as_mut_slice(), n, p, q, c, s);
                rotate(v.as_mut_slice(), m, p, q, c, s);
                norms[p] = dot(w.row(p), w.row(p));
                norms[q] = dot(w.row(q), w.row(q));
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            op: "jacobi svd",
            iterations: max_sweeps,
        });
    }

    let sigma: Vec<f64> = (0..m).map(|j| dot(w.row(j), w.row(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut u = DenseMatrix::zeros(n, m);
    let mut vout = DenseMatrix::zeros(m, m);
    let mut s = Vec::with_capacity(m);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let sv = sigma[src];
        s.push(sv);
        for i in 0..m {
            vout.set(i, dst, v.get(src, i));
        }
        if sv * sv > floor && sv > f64::MIN_POSITIVE * 1e10 {
            for i in 0..n {
                u.set(i, dst, w.get(src, i) / sv);
            }
        } else {
            missing.push(dst);
        }
    }
    complete_basis(&mut u, &missing);
    Ok((u, s, vout))
}

// Rotates rows p and q of a row-major buffer with row length `len`.
fn rotate(buf: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = buf.split_at_mut(q * len);
    let rp = &mut lo[p * len..(p + 1) * len];
    let rq = &mut hi[..len];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to every
/// other column, by Gram-Schmidt on coordinate vectors.
fn complete_basis(u: &mut DenseMatrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let n = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &dst in missing {
        loop {
            assert!(candidate < n, "cannot complete an orthonormal basis");
            let mut x = vec![0.0; n];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &j in &filled {
                    let col = u.column(j);
                    let proj = dot(&col, &x);
                    for (xi, ci) in x.iter_mut().zip(&col) {
                        *xi -= proj * ci;
                    }
                }
            }
            let nrm = dot(&x, &x).sqrt();
            if nrm > 1e-8 {
                for xi in x.iter_mut() {
                    *xi /= nrm;
                }
                u.set_column(dst, &x);
                filled.push(dst);
                break;
            }
        }
    }
}

fn first_significant(col: &[f64]) -> f64 {
    let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    col.iter()
        .copied()
        .find(|x| x.abs() > 1e-12 * scale)
        .unwrap_or(0.0)
}

fn fix_signs(mut svd: SvdResult) -> SvdResult {
    for j in 0..svd.s.len() {
        if first_significant(&svd.u.column(j)) < 0.0 {
            for i in 0..svd.u.rows() {
                let x = svd.u.get(i, j);
                svd.u.set(i, j, -x);
            }
            for i in 0..svd.v.rows() {
                let x = svd.v.get(i, j);
                svd.v.set(i, j, -x);
            }
        }
    }
    svd
}
