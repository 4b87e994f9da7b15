//! Eigendecomposition of small dense real matrices.
//!
//! Eigenvalues: Parlett-Reinsch balancing, Householder reduction to upper
//! Hessenberg form, then Francis double-shift QR iteration on the
//! Hessenberg matrix (eigenvalues only). Eigenvectors: complex inverse
//! iteration on the original matrix, one shift per eigenvalue.
//!
//! Output order is descending `|λ|`, then descending imaginary part, so a
//! conjugate pair appears as `(a + bi, a - bi)`. The vector of the second
//! member of a pair is the exact conjugate of the first. Each vector has
//! unit 2-norm and its largest entry real and positive.

use num_complex::Complex64;

use super::{cnorm2, ComplexMatrix, DenseMatrix, LinalgError, Result};

#[derive(Debug, Clone)]
pub struct EigResult {
    /// Eigenvectors as columns, `q x q`.
    pub vectors: ComplexMatrix,
    pub values: Vec<Complex64>,
}

const QR_ITERATIONS_PER_VALUE: usize = 60;

pub fn eig_dense(a: &DenseMatrix) -> Result<EigResult> {
    let (n, c) = a.shape();
    if n != c {
        return Err(LinalgError::NotSquare { rows: n, cols: c });
    }
    a.check_finite()?;
    if n == 0 {
        return Ok(EigResult {
            vectors: ComplexMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }

    let mut h: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    balance(&mut h);
    hessenberg(&mut h);
    let mut values = hqr(&mut h)?;

    values.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.im.total_cmp(&x.im))
            .then(y.re.total_cmp(&x.re))
    });

    let anorm = a.frobenius_norm();
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut done: Vec<(Complex64, Vec<Complex64>)> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let lambda = values[i];
        // Second member of a conjugate pair: reuse the conjugated vector.
        if lambda.im < 0.0 && i > 0 && values[i - 1] == lambda.conj() {
            let prev: Vec<Complex64> = vectors.column(i - 1).iter().map(|z| z.conj()).collect();
            for (r, z) in prev.iter().enumerate() {
                vectors.set(r, i, *z);
            }
            done.push((lambda, prev));
            i += 1;
            continue;
        }
        let cluster: Vec<&Vec<Complex64>> = done
            .iter()
            .filter(|(mu, _)| (*mu - lambda).norm() <= 1e-10 * anorm.max(1.0))
            .map(|(_, v)| v)
            .collect();
        let mut x = inverse_iteration(a, lambda, anorm, &cluster, done.len());
        if lambda.im == 0.0 {
            for z in x.iter_mut() {
                z.im = 0.0;
            }
            normalize(&mut x);
        }
        for (r, z) in x.iter().enumerate() {
            vectors.set(r, i, *z);
        }
        done.push((lambda, x));
        i += 1;
    }
    Ok(EigResult { vectors, values })
}

fn normalize(x: &mut [Complex64]) {
    let nrm = cnorm2(x);
    if nrm == 0.0 {
        return;
    }
    // Rotate so the largest-modulus entry is real and positive.
    let mut pivot = x[0];
    for z in x.iter() {
        if z.norm() > pivot.norm() {
            pivot = *z;
        }
    }
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    for z in x.iter_mut() {
        *z = *z * phase / nrm;
    }
}

fn inverse_iteration(
    a: &DenseMatrix,
    lambda: Complex64,
    anorm: f64,
    cluster: &[&Vec<Complex64>],
    salt: usize,
) -> Vec<Complex64> {
    let n = a.rows();
    let tiny = f64::EPSILON * anorm.max(f64::MIN_POSITIVE);
    let lu = ComplexLu::new(a, lambda, tiny);

    // Deterministic, generic start vector; shifted per eigenvalue so that
    // members of a cluster start from different directions.
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = (i + 1 + salt) as f64;
            Complex64::new(1.0 + 0.5 * (0.7 * t).sin(), 0.3 * (1.3 * t).cos())
        })
        .collect();
    orthogonalize(&mut x, cluster);
    normalize(&mut x);

    let mut best = x.clone();
    let mut best_res = f64::INFINITY;
    for _ in 0..8 {
        let mut y = lu.solve(&x);
        orthogonalize(&mut y, cluster);
        if cnorm2(&y) == 0.0 || !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        normalize(&mut y);
        x = y;
        let res = residual(a, lambda, &x);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
        if res <= 1e-14 * anorm.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    best
}

fn orthogonalize(x: &mut [Complex64], basis: &[&Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let proj: Complex64 = b.iter().zip(x.iter()).map(|(bi, xi)| bi.conj() * xi).sum();
            for (xi, bi) in x.iter_mut().zip(b.iter()) {
                *xi -= proj * bi;
            }
        }
    }
}

pub(crate) fn residual(a: &DenseMatrix, lambda: Complex64, x: &[Complex64]) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        let mut s = -lambda * x[i];
        for (j, &aij) in a.row(i).iter().enumerate() {
            s += aij * x[j];
        }
        acc += s.norm_sqr();
    }
    acc.sqrt()
}

/// LU with partial pivoting of `A - λI`; pivots smaller than `tiny` are
/// replaced by `tiny` so the solve stays finite at an exact eigenvalue.
struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    fn new(a: &DenseMatrix, lambda: Complex64, tiny: f64) -> Self {
        let n = a.rows();
        let mut lu: Vec<Complex64> = a.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for i in 0..n {
            lu[i * n + i] -= lambda;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[i * n + k].norm() > lu[p * n + k].norm() {
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            if lu[k * n + k].norm() < tiny {
                lu[k * n + k] = Complex64::new(tiny, 0.0);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let t = lu[k * n + j];
                        lu[i * n + j] -= f * t;
                    }
                }
            }
        }
        ComplexLu { n, lu, perm }
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[i * n + j] * y[j];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[i * n + j] * y[j];
                y[i] -= t;
            }
            y[i] /= self.lu[i * n + i];
        }
        y
    }
}

/// Diagonal similarity scaling by powers of two.
fn balance(a: &mut [Vec<f64>]) {
    let n = a.len();
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// In-place reduction to upper Hessenberg form by Householder similarity.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let scale: f64 = (m..n).map(|i| a[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut h = 0.0;
        for i in (m..n).rev() {
            ort[i] = a[i][m - 1] / scale;
            h += ort[i] * ort[i];
        }
        let g = if ort[m] > 0.0 { -h.sqrt() } else { h.sqrt() };
        h -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..n).rev() {
                f += ort[i] * a[i][j];
            }
            f /= h;
            for i in m..n {
                a[i][j] -= f * ort[i];
            }
        }
        for row in a.iter_mut() {
            let mut f = 0.0;
            for j in (m..n).rev() {
                f += ort[j] * row[j];
            }
            f /= h;
            for j in m..n {
                row[j] -= f * ort[j];
            }
        }
        a[m][m - 1] = scale * g;
        for row in a.iter_mut().skip(m + 1) {
            row[m - 1] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift
/// QR algorithm with deflation and exceptional shifts.
fn hqr(h: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let nn = h.len();
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];
    let eps = f64::EPSILON;

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }
    if norm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); nn]);
    }

    let mut n = nn as isize - 1;
    let low: isize = 0;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    while n >= low {
        let nu = n as usize;
        // Look for a single small subdiagonal element.
        let mut l = n;
        while l > low {
            let lu = l as usize;
            s = h[lu - 1][lu - 1].abs() + h[lu][lu].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[lu][lu - 1].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            h[nu][nu] += exshift;
            wr[nu] = h[nu][nu];
            wi[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = h[nu][nu - 1] * h[nu - 1][nu];
            p = (h[nu - 1][nu - 1] - h[nu][nu]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[nu][nu] += exshift;
            h[nu - 1][nu - 1] += exshift;
            x = h[nu][nu];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[nu - 1] = x + z;
                wr[nu] = wr[nu - 1];
                if z != 0.0 {
                    wr[nu] = x - w / z;
                }
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = z;
                wi[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet; form shift.
            x = h[nu][nu];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[nu - 1][nu - 1];
                w = h[nu][nu - 1] * h[nu - 1][nu];
            }
            if iter == 10 {
                exshift += x;
                for (i, row) in h.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                s = h[nu][nu - 1].abs() + h[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for (i, row) in h.iter_mut().enumerate().take(nu + 1) {
                        row[i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > QR_ITERATIONS_PER_VALUE {
                return Err(LinalgError::NoConvergence {
                    op: "hessenberg qr",
                    iterations: iter,
                });
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            loop {
                let mu = m as usize;
                z = h[mu][mu];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[mu + 1][mu] + h[mu][mu + 1];
                q = h[mu + 1][mu + 1] - z - r - s;
                r = h[mu + 2][mu + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[mu][mu - 1].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[mu - 1][mu - 1].abs() + z.abs() + h[mu + 1][mu + 1].abs()))
                {
                    break;
                }
                m -= 1;
            }
            let mu = m as usize;
            for i in mu + 2..=nu {
                h[i][i - 2] = 0.0;
                if i > mu + 2 {
                    h[i][i - 3] = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            let lu = l as usize;
            let mut k = mu;
            while k < nu {
                let notlast = k != nu - 1;
                if k != mu {
                    p = h[k][k - 1];
                    q = h[k + 1][k - 1];
                    r = if notlast { h[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != mu {
                        h[k][k - 1] = -s * x;
                    } else if lu != mu {
                        h[k][k - 1] = -h[k][k - 1];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = h[k][j] + q * h[k + 1][j];
                        if notlast {
                            p += r * h[k + 2][j];
                            h[k + 2][j] -= p * z;
                        }
                        h[k][j] -= p * x;
                        h[k + 1][j] -= p * y;
                    }
                    for row in h.iter_mut().take(nu.min(k + 3) + 1) {
                        p = x * row[k] + y * row[k + 1];
                        if notlast {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k] -= p;
                        row[k + 1] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, RngStream};

    fn check_residuals(a: &DenseMatrix, e: &EigResult) {
        let anorm = a.frobenius_norm();
        for i in 0..a.rows() {
            let x = e.vectors.column(i);
            assert!((cnorm2(&x) - 1.0).abs() < 1e-12);
            let res = residual(a, e.values[i], &x);
            assert!(res <= 1e-8 * anorm, "eigenpair {i}: residual {res}");
        }
    }

    #[test]
    fn diagonal_values_sorted_by_modulus() {
        let a = DenseMatrix::diag(&[2.0, 3.0]);
        let e = eig_dense(&a).unwrap();
        assert_eq!(e.values, vec![Complex64::new(3.0, 0.0), Complex64::new(2.0, 0.0)]);
        check_residuals(&a, &e);
    }

    #[test]
    fn rotation_has_imaginary_unit_pair() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e = eig_dense(&a).unwrap();
        assert!((e.values[0] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((e.values[1] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        check_residuals(&a, &e);
    }

    #[test]
    fn companion_matrix_of_cubic_gives_roots_of_unity() {
        // z^3 - 1: companion with last row (1, 0, 0).
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        let e = eig_dense(&a).unwrap();
        let roots: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0))
            .collect();
        for r in roots {
            let best = e.values.iter().map(|v| (v - r).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "root {r} missed by {best}");
        }
        check_residuals(&a, &e);
    }

    #[test]
    fn repeated_eigenvalue_gets_independent_vectors() {
        let a = DenseMatrix::identity(3);
        let e = eig_dense(&a).unwrap();
        check_residuals(&a, &e);
        let g = e.vectors.adjoint().matmul(&e.vectors).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j).re - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_matrices_pair_conjugates_exactly() {
        for seed in 0..20 {
            let a = gaussian_matrix(12, 12, &mut RngStream::named(seed, "eig"));
            let e = eig_dense(&a).unwrap();
            check_residuals(&a, &e);
            let mut i = 0;
            while i < 12 {
                if e.values[i].im != 0.0 {
                    assert_eq!(e.values[i + 1], e.values[i].conj());
                    assert!(e.values[i].im > 0.0);
                    i += 2;
                } else {
                    i += 1;
                }
            }
            // Sum of eigenvalues equals the trace.
            let trace: f64 = (0..12).map(|k| a.get(k, k)).sum();
            let sum: Complex64 = e.values.iter().sum();
            assert!((sum.re - trace).abs() < 1e-10 && sum.im.abs() < 1e-10);
        }
    }

    #[test]
    fn zero_and_non_square() {
        let e = eig_dense(&DenseMatrix::zeros(3, 3)).unwrap();
        assert!(e.values.iter().all(|v| v.norm() == 0.0));
        assert!(matches!(
            eig_dense(&DenseMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }
}
