//! Randomized sketching variants of the DMD pipeline.
//!
//! Three variants replace the SVD of `X₁` (or the whole decomposition) with
//! a factorization of a small sketch:
//!
//! * `range-x1`: sketch the range of `X₁`, then SVD the `k x (m−1)` projection.
//! * `range-x`: sketch the range of the full `X`, run DMD on the `k x m`
//!   projection and lift the modes back with `Q`.
//! * `range-corange`: sketch range and corange of `X₁` plus a `p x p` core,
//!   solve for the `k x k` core matrix and SVD it.
//!
//! All test matrices are standard Gaussian and drawn from named streams
//! (`omega`, `gamma`, `theta`, `phi`) keyed on the configured seed.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::dmd::{
    dmd_deterministic_fit, model_from_svd, split_snapshots, truncate_svd, DmdError, DmdFit, DmdModel, ModeKind, Result,
};
use crate::linalg::{gaussian_matrix, lstsq, pinv_apply_real, svd_thin, DenseMatrix, HouseholderQr, RngStream, SvdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Deterministic,
    RangeX1,
    RangeX,
    RangeCorange,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Deterministic, Method::RangeX1, Method::RangeX, Method::RangeCorange];

    pub fn name(self) -> &'static str {
        match self {
            Method::Deterministic => "det",
            Method::RangeX1 => "range-x1",
            Method::RangeX => "range-x",
            Method::RangeCorange => "range-corange",
        }
    }

    pub fn is_sketched(self) -> bool {
        self != Method::Deterministic
    }

    /// Fits a rank-`rank` model with this method.
    pub fn fit(self, x: &DenseMatrix, rank: usize, cfg: &SketchConfig, mode_kind: ModeKind, dt: f64) -> Result<DmdFit> {
        match self {
            Method::Deterministic => dmd_deterministic_fit(x, rank, mode_kind, dt),
            Method::RangeX1 => dmd_range_x1(x, rank, cfg, mode_kind, dt),
            Method::RangeX => dmd_range_x(x, rank, cfg, mode_kind, dt),
            Method::RangeCorange => dmd_range_corange(x, rank, cfg, mode_kind, dt),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (expected det, range-x1, range-x or range-corange)"))
    }
}

/// Sketch sizes. `k` is the range dimension and `p` the core dimension
/// (written `s` in some listings of the corange variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchConfig {
    pub target_rank: usize,
    pub k: usize,
    pub p: usize,
    pub seed: u64,
}

impl SketchConfig {
    /// `k = 2r`, `p = 2k + 1`.
    pub fn range(r: usize, seed: u64) -> Self {
        let k = 2 * r;
        SketchConfig {
            target_rank: r,
            k,
            p: 2 * k + 1,
            seed,
        }
    }

    /// `k = 2r + 1`, `p = 2k + 1`.
    pub fn corange(r: usize, seed: u64) -> Self {
        let k = 2 * r + 1;
        SketchConfig {
            target_rank: r,
            k,
            p: 2 * k + 1,
            seed,
        }
    }

    pub fn for_method(method: Method, r: usize, seed: u64) -> Self {
        match method {
            Method::RangeCorange => SketchConfig::corange(r, seed),
            _ => SketchConfig::range(r, seed),
        }
    }

    pub fn oversampling(&self) -> usize {
        self.k.saturating_sub(self.target_rank)
    }

    /// Checks `r ≤ k ≤ p` and the size limit for `method` on an `n x m`
    /// snapshot matrix. The limit on `p` only applies to `range-corange`.
    pub fn validate(&self, method: Method, n: usize, m: usize) -> Result<()> {
        let bad = |msg: String| Err(DmdError::InvalidParameter(msg));
        if self.target_rank == 0 {
            return bad("target rank must be at least 1".into());
        }
        if self.target_rank > self.k {
            return bad(format!("need r <= k, got r = {} and k = {}", self.target_rank, self.k));
        }
        if self.k > self.p {
            return bad(format!("need k <= p, got k = {} and p = {}", self.k, self.p));
        }
        let m1 = m.saturating_sub(1);
        match method {
            Method::Deterministic => Ok(()),
            Method::RangeX1 if self.k > n.min(m1) => bad(format!("need k <= min(n, m-1) = {}, got {}", n.min(m1), self.k)),
            Method::RangeX if self.k > n.min(m) => bad(format!("need k <= min(n, m) = {}, got {}", n.min(m), self.k)),
            Method::RangeCorange if self.p > n.min(m1) => bad(format!("need p <= min(n, m-1) = {}, got {}", n.min(m1), self.p)),
            _ => Ok(()),
        }
    }
}

/// Supplier of random test matrices by stream name.
pub trait TestMatrixSource {
    fn draw(&mut self, name: &str, rows: usize, cols: usize) -> DenseMatrix;
}

/// Independent standard normal entries, one stream per name.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSource {
    pub seed: u64,
}

impl TestMatrixSource for GaussianSource {
    fn draw(&mut self, name: &str, rows: usize, cols: usize) -> DenseMatrix {
        gaussian_matrix(rows, cols, &mut RngStream::named(self.seed, name))
    }
}

fn orthonormal_basis(y: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(HouseholderQr::new(y)?.thin_q())
}

/// Recovered SVD of `x1` from a range sketch of width `k`.
pub fn sketch_svd_range_x1(x1: &DenseMatrix, k: usize, source: &mut impl TestMatrixSource) -> Result<SvdResult> {
    let (n, m1) = x1.shape();
    if k == 0 || k > n.min(m1) {
        return Err(DmdError::InvalidParameter(format!("need 1 <= k <= {}, got {k}", n.min(m1))));
    }
    let omega = source.draw("omega", m1, k);
    let y = x1.matmul(&omega)?;
    let q = orthonormal_basis(&y)?;
    let b = q.matmul_transa(x1)?;
    assert_eq!(b.shape(), (k, m1));
    let small = svd_thin(&b)?;
    Ok(SvdResult {
        u: q.matmul(&small.u)?,
        s: small.s,
        v: small.v,
    })
}

/// Orthonormal range basis `Q` of the whole snapshot matrix and the
/// projected data `B = QᵀX`.
pub fn sketch_range_x(x: &DenseMatrix, k: usize, source: &mut impl TestMatrixSource) -> Result<(DenseMatrix, DenseMatrix)> {
    let (n, m) = x.shape();
    if k == 0 || k > n.min(m) {
        return Err(DmdError::InvalidParameter(format!("need 1 <= k <= {}, got {k}", n.min(m))));
    }
    let omega = source.draw("omega", m, k);
    let y = x.matmul(&omega)?;
    let q = orthonormal_basis(&y)?;
    let b = q.matmul_transa(x)?;
    assert_eq!(b.shape(), (k, m));
    Ok((q, b))
}

/// Recovered SVD of `x1` from range, corange and core sketches.
pub fn sketch_svd_range_corange(
    x1: &DenseMatrix,
    k: usize,
    p: usize,
    source: &mut impl TestMatrixSource,
) -> Result<SvdResult> {
    let (n, m1) = x1.shape();
    if k == 0 || k > p || p > n.min(m1) {
        return Err(DmdError::InvalidParameter(format!(
            "need 1 <= k <= p <= {}, got k = {k}, p = {p}",
            n.min(m1)
        )));
    }
    let omega = source.draw("omega", m1, k);
    let gamma = source.draw("gamma", k, n);
    let theta = source.draw("theta", m1, p);
    let phi = source.draw("phi", p, n);

    let f1 = x1.matmul(&omega)?;
    // Γ₁X₁ and Φ₁X₁ as transposed products so X₁ is streamed once each.
    let g1 = gamma.transpose().matmul_transa(x1)?;
    let h1 = phi.transpose().matmul_transa(x1)?.matmul(&theta)?;
    assert_eq!(h1.shape(), (p, p));

    let q1 = orthonormal_basis(&f1)?;
    let p1 = orthonormal_basis(&g1.transpose())?;
    let phi_q = phi.matmul(&q1)?;
    let z = lstsq(&phi_q, &h1)?;
    let theta_p = theta.matmul_transa(&p1)?;
    let ct = lstsq(&theta_p, &z.x.transpose())?;
    if z.rank_deficient || ct.rank_deficient {
        log::warn!("core solve was rank deficient; used pseudoinverse");
    }
    let c1 = ct.x.transpose();
    assert_eq!(c1.shape(), (k, k));
    let small = svd_thin(&c1)?;
    Ok(SvdResult {
        u: q1.matmul(&small.u)?,
        s: small.s,
        v: p1.matmul(&small.v)?,
    })
}

fn check_rank(rank: usize, cfg: &SketchConfig, limit: usize) -> Result<()> {
    let max = cfg.k.min(limit);
    if rank == 0 || rank > max {
        return Err(DmdError::InvalidRank { rank, max });
    }
    Ok(())
}

fn finish(x: &DenseMatrix, x2: &DenseMatrix, svd: SvdResult, rank: usize, mode_kind: ModeKind, dt: f64, svd_seconds: f64) -> Result<DmdFit> {
    let svd = truncate_svd(&svd, rank)?;
    let effective_rank = svd.s.len();
    let model = model_from_svd(x2, &svd, &x.column(0), mode_kind, dt, x.cols())?;
    Ok(DmdFit {
        model,
        svd_seconds,
        effective_rank,
    })
}

/// DMD with the SVD of `X₁` taken from a range sketch.
pub fn dmd_range_x1(x: &DenseMatrix, rank: usize, cfg: &SketchConfig, mode_kind: ModeKind, dt: f64) -> Result<DmdFit> {
    cfg.validate(Method::RangeX1, x.rows(), x.cols())?;
    let (x1, x2) = split_snapshots(x)?;
    check_rank(rank, cfg, x.rows().min(x.cols() - 1))?;
    let start = Instant::now();
    let svd = sketch_svd_range_x1(&x1, cfg.k, &mut GaussianSource { seed: cfg.seed })?;
    let svd_seconds = start.elapsed().as_secs_f64();
    finish(x, &x2, svd, rank, mode_kind, dt, svd_seconds)
}

/// DMD with the SVD of `X₁` recovered from range, corange and core sketches.
pub fn dmd_range_corange(x: &DenseMatrix, rank: usize, cfg: &SketchConfig, mode_kind: ModeKind, dt: f64) -> Result<DmdFit> {
    cfg.validate(Method::RangeCorange, x.rows(), x.cols())?;
    let (x1, x2) = split_snapshots(x)?;
    check_rank(rank, cfg, x.rows().min(x.cols() - 1))?;
    let start = Instant::now();
    let svd = sketch_svd_range_corange(&x1, cfg.k, cfg.p, &mut GaussianSource { seed: cfg.seed })?;
    let svd_seconds = start.elapsed().as_secs_f64();
    finish(x, &x2, svd, rank, mode_kind, dt, svd_seconds)
}

/// DMD run entirely on `B = QᵀX`, with modes lifted back as `QΨ̃`.
/// Eigenvalues come from the small problem unchanged; amplitudes are fitted
/// against the full first snapshot.
pub fn dmd_range_x(x: &DenseMatrix, rank: usize, cfg: &SketchConfig, mode_kind: ModeKind, dt: f64) -> Result<DmdFit> {
    cfg.validate(Method::RangeX, x.rows(), x.cols())?;
    let (n, m) = x.shape();
    if m < 2 {
        return Err(DmdError::TooFewSnapshots(m));
    }
    check_rank(rank, cfg, m - 1)?;
    let start = Instant::now();
    let (q, b) = sketch_range_x(x, cfg.k, &mut GaussianSource { seed: cfg.seed })?;
    let (b1, b2) = split_snapshots(&b)?;
    let svd = svd_thin(&b1)?;
    let svd_seconds = start.elapsed().as_secs_f64();
    let svd = truncate_svd(&svd, rank)?;
    let effective_rank = svd.s.len();
    let small = model_from_svd(&b2, &svd, &b.column(0), mode_kind, dt, m)?;
    let modes = q.matmul_complex(&small.modes)?;
    debug_assert_eq!(modes.rows(), n);
    let amps = pinv_apply_real(&modes, &x.column(0))?.x;
    let model = DmdModel::new(modes, small.lambda, amps, dt, mode_kind, m)?;
    Ok(DmdFit {
        model,
        svd_seconds,
        effective_rank,
    })
}
