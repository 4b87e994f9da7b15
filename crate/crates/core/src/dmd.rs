//! SVD-based dynamic mode decomposition and reconstruction.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use crate::linalg::{eig_dense, pinv_apply_real, svd_thin, ComplexMatrix, DenseMatrix, LinalgError, SvdResult};

/// Singular values below this fraction of the largest are dropped.
const SIGMA_FLOOR: f64 = 1e-14;
/// Eigenvalues with modulus below this have no logarithm worth keeping.
const LAMBDA_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DmdError {
    #[error("need at least 2 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("rank {rank} is outside 1..={max}")]
    InvalidRank { rank: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DmdError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeKind {
    /// `Ψ = U_R W`.
    #[default]
    Projected,
    /// `Ψ = X₂ V_R Σ_R⁻¹ W`.
    Exact,
}

impl ModeKind {
    pub fn name(self) -> &'static str {
        match self {
            ModeKind::Projected => "projected",
            ModeKind::Exact => "exact",
        }
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "projected" => Ok(ModeKind::Projected),
            "exact" => Ok(ModeKind::Exact),
            other => Err(format!("unknown mode kind '{other}'")),
        }
    }
}

/// Modes, spectrum and amplitudes of a fitted linear model.
///
/// Time is measured from the first snapshot: `t = 0` corresponds to
/// `x⁽¹⁾` and snapshot `k` (1-based) sits at `(k − 1) ΔT`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmdModel {
    /// `n x q`, one mode per column.
    pub modes: ComplexMatrix,
    /// Discrete-time eigenvalues.
    pub lambda: Vec<Complex64>,
    /// Continuous-time eigenvalues `ln(λ)/ΔT`, principal branch, in 1/s.
    pub alpha: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub dt: f64,
    pub mode_kind: ModeKind,
    /// Number of snapshots the model was fitted to.
    pub n_snapshots: usize,
}

/// A reconstructed real field and the norm of the discarded imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub values: Vec<f64>,
    pub imag_norm: f64,
}

/// `ln(λ)/ΔT` on the principal branch: a negative real `λ` gives
/// imaginary part `+π/ΔT`.
pub fn continuous_eigenvalue(lambda: Complex64, dt: f64) -> Complex64 {
    lambda.ln() / dt
}

impl DmdModel {
    pub fn new(
        modes: ComplexMatrix,
        lambda: Vec<Complex64>,
        b: Vec<Complex64>,
        dt: f64,
        mode_kind: ModeKind,
        n_snapshots: usize,
    ) -> Result<Self> {
        let alpha = lambda.iter().map(|&l| continuous_eigenvalue(l, dt)).collect();
        let model = DmdModel {
            modes,
            lambda,
            alpha,
            b,
            dt,
            mode_kind,
            n_snapshots,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.lambda.len();
        if self.modes.cols() != q || self.b.len() != q || self.alpha.len() != q {
            return Err(DmdError::InvalidModel(format!(
                "{} modes, {} eigenvalues, {} amplitudes, {} rates",
                self.modes.cols(),
                q,
                self.b.len(),
                self.alpha.len()
            )));
        }
        if !(self.dt > 0.0) {
            return Err(DmdError::InvalidModel(format!("time step {} must be positive", self.dt)));
        }
        for (i, (&l, &a)) in self.lambda.iter().zip(&self.alpha).enumerate() {
            let want = continuous_eigenvalue(l, self.dt);
            if (a - want).norm() > 1e-9 * want.norm().max(1.0 / self.dt) {
                return Err(DmdError::InvalidModel(format!("alpha[{i}] = {a} but ln(lambda)/dt = {want}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.modes.rows()
    }

    pub fn q(&self) -> usize {
        self.lambda.len()
    }

    fn combine(&self, coeffs: &[Complex64]) -> Reconstruction {
        let x = self.modes.matvec(coeffs).expect("coefficient count matches modes");
        let values: Vec<f64> = x.iter().map(|z| z.re).collect();
        let imag_norm = x.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        Reconstruction { values, imag_norm }
    }

    /// `Re Σ ψᵢ e^{αᵢ t} bᵢ`.
    pub fn reconstruct(&self, t: f64) -> Reconstruction {
        let coeffs: Vec<Complex64> = self
            .alpha
            .iter()
            .zip(&self.b)
            .map(|(&a, &b)| (a * t).exp() * b)
            .collect();
        self.combine(&coeffs)
    }

    /// `Re Ψ Λ^{k−1} b` for the 1-based snapshot index `k`.
    pub fn discrete_reconstruct(&self, k: usize) -> Reconstruction {
        assert!(k >= 1, "snapshot index is 1-based");
        let p = (k - 1) as u32;
        let coeffs: Vec<Complex64> = self.lambda.iter().zip(&self.b).map(|(&l, &b)| l.powu(p) * b).collect();
        self.combine(&coeffs)
    }

    /// All `count` snapshots `t = 0, ΔT, …` as columns of an `n x count`
    /// matrix, via `Re(Ψ) Re(D) − Im(Ψ) Im(D)` with `D[i, k] = e^{αᵢ kΔT} bᵢ`.
    pub fn reconstruct_window(&self, count: usize) -> DenseMatrix {
        let q = self.q();
        let mut dre = DenseMatrix::zeros(q, count);
        let mut dim = DenseMatrix::zeros(q, count);
        for i in 0..q {
            for k in 0..count {
                let z = (self.alpha[i] * (k as f64 * self.dt)).exp() * self.b[i];
                dre.set(i, k, z.re);
                dim.set(i, k, z.im);
            }
        }
        let (pre, pim) = self.modes.split();
        let a = pre.matmul(&dre).expect("shapes agree");
        let b = pim.matmul(&dim).expect("shapes agree");
        a.sub(&b).expect("shapes agree")
    }

    /// Sub-model keeping the listed modes, in the listed order.
    pub fn subset(&self, idx: &[usize]) -> DmdModel {
        DmdModel {
            modes: self.modes.select_columns(idx),
            lambda: idx.iter().map(|&i| self.lambda[i]).collect(),
            alpha: idx.iter().map(|&i| self.alpha[i]).collect(),
            b: idx.iter().map(|&i| self.b[i]).collect(),
            dt: self.dt,
            mode_kind: self.mode_kind,
            n_snapshots: self.n_snapshots,
        }
    }

    /// Index of the eigenvalue nearest to `conj(λᵢ)` among the others, if
    /// `λᵢ` is not real and the match is within `1e-8 |λᵢ|`.
    pub fn conjugate_partner(&self, i: usize) -> Option<usize> {
        conjugate_partner(&self.lambda, i)
    }
}

pub fn conjugate_partner(lambda: &[Complex64], i: usize) -> Option<usize> {
    let l = lambda[i];
    if l.im == 0.0 {
        return None;
    }
    let target = l.conj();
    let (best, dist) = lambda
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &m)| (j, (m - target).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))?;
    (dist <= 1e-8 * l.norm().max(f64::MIN_POSITIVE)).then_some(best)
}

/// A fitted model and how it was obtained.
#[derive(Debug, Clone)]
pub struct DmdFit {
    pub model: DmdModel,
    /// Wall-clock time of the SVD (or sketch + small SVD) stage.
    pub svd_seconds: f64,
    /// Rank actually used after dropping negligible singular values.
    pub effective_rank: usize,
}

/// `X₁ = X[:, 0..m−1]`, `X₂ = X[:, 1..m]`.
pub fn split_snapshots(x: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let m = x.cols();
    if m < 2 {
        return Err(DmdError::TooFewSnapshots(m));
    }
    Ok((x.columns(0..m - 1), x.columns(1..m)))
}

/// Leading `r` triplets, shortened further (with a warning) past any
/// singular value below `1e-14 σ_max`.
pub fn truncate_svd(svd: &SvdResult, r: usize) -> Result<SvdResult> {
    let max = svd.s.len();
    if r == 0 || r > max {
        return Err(DmdError::InvalidRank { rank: r, max });
    }
    let smax = svd.s[0];
    let keep = svd.s[..r].iter().take_while(|&&s| s > SIGMA_FLOOR * smax).count();
    if keep == 0 {
        return Err(DmdError::InvalidParameter("data matrix is zero".into()));
    }
    if keep < r {
        log::warn!("truncating rank from {r} to {keep}: remaining singular values are negligible");
    }
    Ok(svd.truncate(keep))
}

/// `V_R Σ_R⁻¹`.
fn v_sigma_inv(svd: &SvdResult) -> DenseMatrix {
    let mut vs = svd.v.clone();
    for i in 0..vs.rows() {
        for (j, &s) in svd.s.iter().enumerate() {
            let v = vs.get(i, j) / s;
            vs.set(i, j, v);
        }
    }
    vs
}

/// `Ã = U_Rᵀ X₂ V_R Σ_R⁻¹`.
pub fn reduced_operator(x2: &DenseMatrix, svd: &SvdResult) -> Result<DenseMatrix> {
    let utx2 = svd.u.matmul_transa(x2)?;
    Ok(utx2.matmul(&v_sigma_inv(svd))?)
}

/// Eigen-decomposes `Ã`, builds modes and amplitudes. `svd` must already
/// be truncated. `x1` is the first snapshot.
pub fn model_from_svd(
    x2: &DenseMatrix,
    svd: &SvdResult,
    x1: &[f64],
    mode_kind: ModeKind,
    dt: f64,
    n_snapshots: usize,
) -> Result<DmdModel> {
    let atilde = reduced_operator(x2, svd)?;
    let eig = eig_dense(&atilde)?;
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i].norm() >= LAMBDA_FLOOR)
        .collect();
    if keep.len() < eig.values.len() {
        log::warn!(
            "dropping {} mode(s) with |lambda| < {LAMBDA_FLOOR:e}",
            eig.values.len() - keep.len()
        );
    }
    let w = eig.vectors.select_columns(&keep);
    let lambda: Vec<Complex64> = keep.iter().map(|&i| eig.values[i]).collect();
    let modes = match mode_kind {
        ModeKind::Projected => svd.u.matmul_complex(&w)?,
        ModeKind::Exact => x2.matmul(&v_sigma_inv(svd))?.matmul_complex(&w)?,
    };
    let b = pinv_apply_real(&modes, x1)?.x;
    DmdModel::new(modes, lambda, b, dt, mode_kind, n_snapshots)
}

/// Deterministic DMD with SVD truncation rank `r`.
pub fn dmd_deterministic(x: &DenseMatrix, r: usize, mode_kind: ModeKind, dt: f64) -> Result<DmdModel> {
    Ok(dmd_deterministic_fit(x, r, mode_kind, dt)?.model)
}

pub fn dmd_deterministic_fit(x: &DenseMatrix, r: usize, mode_kind: ModeKind, dt: f64) -> Result<DmdFit> {
    let (x1, x2) = split_snapshots(x)?;
    let max = x.rows().min(x.cols() - 1);
    if r == 0 || r > max {
        return Err(DmdError::InvalidRank { rank: r, max });
    }
    let start = Instant::now();
    let svd = svd_thin(&x1)?;
    let svd_seconds = start.elapsed().as_secs_f64();
    let svd = truncate_svd(&svd, r)?;
    let effective_rank = svd.s.len();
    let model = model_from_svd(&x2, &svd, &x.column(0), mode_kind, dt, x.cols())?;
    Ok(DmdFit {
        model,
        svd_seconds,
        effective_rank,
    })
}
