//! Least squares and pseudoinverse application.
//!
//! Full-rank tall systems are solved with Householder QR. When a diagonal
//! entry of `R` falls below `1e-12 * |R[0,0]|` the system is flagged as rank
//! deficient and solved through the SVD pseudoinverse instead, discarding
//! singular values below the same relative cutoff.
//!
//! Complex systems `Ψ b ≈ x` are solved through the real embedding
//! `[[Re Ψ, -Im Ψ], [Im Ψ, Re Ψ]] [Re b; Im b] = [Re x; Im x]`.

use num_complex::Complex64;

use super::qr::{back_substitute, HouseholderQr};
use super::svd::svd_thin;
use super::{ComplexMatrix, DenseMatrix, LinalgError, Result};

const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: DenseMatrix,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone)]
pub struct PinvSolution {
    pub x: Vec<Complex64>,
    pub rank_deficient: bool,
}

/// Minimizes `‖A X - B‖_F` for tall `A` (`n x k`, `n >= k`).
pub fn lstsq(a: &DenseMatrix, b: &DenseMatrix) -> Result<LstsqSolution> {
    let (n, k) = a.shape();
    if b.rows() != n {
        return Err(LinalgError::DimensionMismatch {
            op: "lstsq",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if n < k {
        return Err(LinalgError::WideMatrix { op: "lstsq", rows: n, cols: k });
    }
    a.check_finite()?;
    b.check_finite()?;
    if k == 0 {
        return Ok(LstsqSolution {
            x: DenseMatrix::zeros(0, b.cols()),
            rank_deficient: false,
        });
    }
    let qr = HouseholderQr::new(a)?;
    let d = qr.r_diag_abs();
    let lead = d[0];
    let deficient = lead == 0.0 || d.iter().any(|&v| v < RANK_TOL * lead);
    if !deficient {
        let qtb = qr.apply_qt(b)?;
        return Ok(LstsqSolution {
            x: back_substitute(&qr.r(), &qtb),
            rank_deficient: false,
        });
    }
    log::warn!("least-squares system {n}x{k} is rank deficient; using the SVD pseudoinverse");
    Ok(LstsqSolution {
        x: svd_pinv_solve(a, b)?,
        rank_deficient: true,
    })
}

fn svd_pinv_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let svd = svd_thin(a)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let mut utb = svd.u.matmul_transa(b)?;
    for (i, &s) in svd.s.iter().enumerate() {
        let inv = if s > RANK_TOL * smax { 1.0 / s } else { 0.0 };
        for c in 0..utb.cols() {
            let v = utb.get(i, c) * inv;
            utb.set(i, c, v);
        }
    }
    svd.v.matmul(&utb)
}

fn embed(psi: &ComplexMatrix) -> DenseMatrix {
    let (n, q) = psi.shape();
    DenseMatrix::from_fn(2 * n, 2 * q, |i, j| {
        let z = psi.get(i % n, j % q);
        match (i < n, j < q) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn solve_embedded(psi: &ComplexMatrix, rhs: Vec<f64>) -> Result<PinvSolution> {
    let q = psi.cols();
    let a = embed(psi);
    let b = DenseMatrix::new(rhs.len(), 1, rhs)?;
    let sol = lstsq(&a, &b)?;
    let v = sol.x.into_vec();
    let x = (0..q).map(|j| Complex64::new(v[j], v[q + j])).collect();
    Ok(PinvSolution {
        x,
        rank_deficient: sol.rank_deficient,
    })
}

/// `Ψ⁺ x` for complex `x`.
pub fn pinv_apply(psi: &ComplexMatrix, x: &[Complex64]) -> Result<PinvSolution> {
    if x.len() != psi.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "pinv_apply",
            left: psi.shape(),
            right: (x.len(), 1),
        });
    }
    let rhs = x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect();
    solve_embedded(psi, rhs)
}

/// `Ψ⁺ x` for real `x`.
pub fn pinv_apply_real(psi: &ComplexMatrix, x: &[f64]) -> Result<PinvSolution> {
    if x.len() != psi.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "pinv_apply",
            left: psi.shape(),
            right: (x.len(), 1),
        });
    }
    let rhs = x.iter().copied().chain(std::iter::repeat(0.0).take(x.len())).collect();
    solve_embedded(psi, rhs)
}
