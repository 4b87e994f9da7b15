#![allow(dead_code)]

use num_complex::Complex64;
use sketchydmd::linalg::{gaussian_matrix, DenseMatrix, RngStream};

/// Snapshots of a linear system with a known spectrum, generated by
/// repeated multiplication in a 10-dimensional latent space.
pub struct Planted {
    pub x: DenseMatrix,
    pub lambda: Vec<Complex64>,
    /// `n x 10` embedding of the latent state.
    pub basis: DenseMatrix,
    /// Latent one-step map, block diagonal.
    pub step: DenseMatrix,
    /// Latent states, one per snapshot.
    pub states: Vec<Vec<f64>>,
}

const PAIRS: [(f64, f64); 4] = [(1.05, 0.12), (1.0, 0.3), (0.93, 0.55), (0.85, 1.1)];
const REALS: [f64; 2] = [0.97, 0.7];

pub fn planted(n: usize, m: usize, seed: u64) -> Planted {
    let rank = 2 * PAIRS.len() + REALS.len();
    let mut step = DenseMatrix::zeros(rank, rank);
    let mut lambda = Vec::new();
    for (b, &(r, th)) in PAIRS.iter().enumerate() {
        let i = 2 * b;
        step.set(i, i, r * th.cos());
        step.set(i, i + 1, -r * th.sin());
        step.set(i + 1, i, r * th.sin());
        step.set(i + 1, i + 1, r * th.cos());
        lambda.push(Complex64::from_polar(r, th));
        lambda.push(Complex64::from_polar(r, -th));
    }
    for (o, &l) in REALS.iter().enumerate() {
        let i = 2 * PAIRS.len() + o;
        step.set(i, i, l);
        lambda.push(Complex64::new(l, 0.0));
    }
    let basis = gaussian_matrix(n, rank, &mut RngStream::named(seed, "planted-basis"));
    let mut z: Vec<f64> = (0..rank).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut states = Vec::with_capacity(m);
    for _ in 0..m {
        states.push(z.clone());
        z = step.matvec(&z).unwrap();
    }
    let mut x = DenseMatrix::zeros(n, m);
    for (k, s) in states.iter().enumerate() {
        x.set_column(k, &basis.matvec(s).unwrap());
    }
    Planted {
        x,
        lambda,
        basis,
        step,
        states,
    }
}

/// Largest distance when each wanted value is paired with the nearest
/// unused found value.
pub fn spectrum_error(want: &[Complex64], found: &[Complex64]) -> f64 {
    assert!(found.len() >= want.len(), "{} found, {} wanted", found.len(), want.len());
    let mut used = vec![false; found.len()];
    let mut worst: f64 = 0.0;
    for w in want {
        let (j, d) = found
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, f)| (j, (f - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `n x m` matrix of exact rank `rank`.
pub fn low_rank(n: usize, m: usize, rank: usize, seed: u64) -> DenseMatrix {
    let a = gaussian_matrix(n, rank, &mut RngStream::named(seed, "low-rank-left"));
    let b = gaussian_matrix(rank, m, &mut RngStream::named(seed, "low-rank-right"));
    a.matmul(&b).unwrap()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}
