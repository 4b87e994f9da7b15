//! Seeded, splittable random streams.
//!
//! A stream is the ChaCha8 keystream keyed by a 64-bit seed, with the
//! ChaCha stream (nonce) word set to a 64-bit stream id. Stream ids are
//! derived from a name with FNV-1a-64; [`RngStream::substream`] mixes an
//! index into the id with a splitmix64 step. Two streams with the same seed
//! and id always yield the same sequence, and distinct ids never share
//! keystream blocks.
//!
//! Normal deviates come from the Box-Muller transform applied to pairs of
//! 53-bit uniforms; both outputs of each pair are used.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::DenseMatrix;

pub struct RngStream {
    rng: ChaCha8Rng,
    seed: u64,
    id: u64,
    spare: Option<f64>,
}

/// FNV-1a over the UTF-8 bytes of `name`.
pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn with_id(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        RngStream {
            rng,
            seed,
            id,
            spare: None,
        }
    }

    pub fn named(seed: u64, name: &str) -> Self {
        Self::with_id(seed, stream_id(name))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Independent child stream `index` of this stream (same seed).
    pub fn substream(&self, index: u64) -> Self {
        Self::with_id(self.seed, splitmix64(self.id ^ splitmix64(index)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// `rows x cols` matrix of i.i.d. standard normals, filled row by row.
pub fn gaussian_matrix(rows: usize, cols: usize, stream: &mut RngStream) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| stream.normal()).collect();
    DenseMatrix::from_parts(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = gaussian_matrix(4, 3, &mut RngStream::named(7, "omega"));
        let b = gaussian_matrix(4, 3, &mut RngStream::named(7, "omega"));
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_differ() {
        let a = gaussian_matrix(4, 3, &mut RngStream::named(7, "omega"));
        let b = gaussian_matrix(4, 3, &mut RngStream::named(7, "gamma"));
        let c = gaussian_matrix(4, 3, &mut RngStream::named(8, "omega"));
        assert_ne!(a, b);
        assert_ne!(a, c);
        let parent = RngStream::named(7, "kappa");
        let s0 = gaussian_matrix(2, 2, &mut parent.substream(0));
        let s1 = gaussian_matrix(2, 2, &mut parent.substream(1));
        assert_ne!(s0, s1);
    }

    #[test]
    fn moments_of_normal_samples() {
        let m = gaussian_matrix(1000, 100, &mut RngStream::named(2024, "moments"));
        let n = m.as_slice().len() as f64;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        let var = m.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut s = RngStream::named(1, "u");
        let xs: Vec<f64> = (0..10_000).map(|_| s.uniform()).collect();
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(stream_id(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(stream_id("a"), 0xaf63_dc4c_8601_ec8c);
    }
}
