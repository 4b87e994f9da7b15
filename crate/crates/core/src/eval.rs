//! Error metrics and the method x criterion benchmark.

use std::fmt::Write as _;
use std::time::Instant;

use crate::dmd::{DmdError, ModeKind, Result};
use crate::linalg::{footprint, DenseMatrix, LinalgError};
use crate::select::{select_modes, Criterion, SelectOptions};
use crate::sketch::{Method, SketchConfig};

pub const REPORT_HEADER: &str = "method,criterion,rank,k,p,seed,rmse,svd_seconds,total_seconds,peak_bytes,status";

/// Root mean square of `a − b` over every entry.
pub fn rmse(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch {
            op: "rmse",
            left: a.shape(),
            right: b.shape(),
        }
        .into());
    }
    let len = a.as_slice().len();
    if len == 0 {
        return Ok(0.0);
    }
    let sum: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum / len as f64).sqrt())
}

/// SVD truncation rank used for a criterion: `r` for early truncation,
/// `min(2r, m − 1)` otherwise.
pub fn svd_rank(criterion: Criterion, r: usize, m: usize) -> usize {
    match criterion {
        Criterion::Early => r,
        _ => (2 * r).min(m.saturating_sub(1)),
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub methods: Vec<Method>,
    pub criteria: Vec<Criterion>,
    /// Modes retained.
    pub r: usize,
    pub seeds: Vec<u64>,
    pub mode_kind: ModeKind,
    /// Overrides for the sketch sizes; defaults follow the method.
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub select: SelectOptions,
}

impl BenchmarkSpec {
    pub fn new(methods: Vec<Method>, criteria: Vec<Criterion>, r: usize, seeds: Vec<u64>) -> Self {
        BenchmarkSpec {
            methods,
            criteria,
            r,
            seeds,
            mode_kind: ModeKind::Projected,
            k: None,
            p: None,
            select: SelectOptions::default(),
        }
    }

    pub fn sketch_config(&self, method: Method, seed: u64) -> SketchConfig {
        let mut cfg = SketchConfig::for_method(method, self.r, seed);
        if let Some(k) = self.k {
            cfg.k = k;
            if self.p.is_none() {
                cfg.p = 2 * k + 1;
            }
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub method: Method,
    pub criterion: Criterion,
    pub r: usize,
    /// Zero when the method does not use it.
    pub k: usize,
    pub p: usize,
    pub seed: u64,
    /// NaN when the combination failed.
    pub rmse: f64,
    pub svd_seconds: f64,
    pub total_seconds: f64,
    /// Largest matrix storage alive on top of the input during the run.
    pub peak_bytes: usize,
    pub status: String,
}

impl BenchmarkRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:e},{:.6},{:.6},{},{}",
                r.method,
                r.criterion,
                r.r,
                r.k,
                r.p,
                r.seed,
                r.rmse,
                r.svd_seconds,
                r.total_seconds,
                r.peak_bytes,
                r.status.replace([',', '\n'], ";")
            );
        }
        out
    }

    pub fn find(&self, method: Method, criterion: Criterion, seed: u64) -> Option<&BenchmarkRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.criterion == criterion && r.seed == seed)
    }
}

struct Outcome {
    rmse: f64,
    svd_seconds: f64,
}

fn run_one(
    x: &DenseMatrix,
    dt: f64,
    method: Method,
    criterion: Criterion,
    cfg: &SketchConfig,
    spec: &BenchmarkSpec,
) -> Result<Outcome> {
    let m = x.cols();
    let rank = svd_rank(criterion, spec.r, m);
    if rank < spec.r {
        return Err(DmdError::InvalidRank { rank: spec.r, max: rank });
    }
    let fit = method.fit(x, rank, cfg, spec.mode_kind, dt)?;
    let keep = spec.r.min(fit.model.q());
    let sel = select_modes(&fit.model, criterion, keep, &x.column(0), spec.select)?;
    let xr = sel.model.reconstruct_window(m);
    Ok(Outcome {
        rmse: rmse(x, &xr)?,
        svd_seconds: fit.svd_seconds,
    })
}

/// Runs every (method, criterion, seed) combination on `x`, whose columns
/// are snapshots `dt` seconds apart. Failures become rows with an error
/// status. The deterministic method ignores the seed.
pub fn run_benchmark(x: &DenseMatrix, dt: f64, spec: &BenchmarkSpec) -> BenchmarkReport {
    let mut rows = Vec::with_capacity(spec.methods.len() * spec.criteria.len() * spec.seeds.len());
    for &seed in &spec.seeds {
        for &method in &spec.methods {
            let cfg = spec.sketch_config(method, seed);
            let (k, p) = match method {
                Method::Deterministic => (0, 0),
                Method::RangeX1 | Method::RangeX => (cfg.k, 0),
                Method::RangeCorange => (cfg.k, cfg.p),
            };
            for &criterion in &spec.criteria {
                footprint::reset_peak();
                let base = footprint::live_bytes();
                let start = Instant::now();
                let outcome = run_one(x, dt, method, criterion, &cfg, spec);
                let total_seconds = start.elapsed().as_secs_f64();
                let peak_bytes = footprint::peak_bytes().saturating_sub(base);
                let (rmse, svd_seconds, status) = match outcome {
                    Ok(o) => (o.rmse, o.svd_seconds, "ok".to_string()),
                    Err(e) => {
                        log::warn!("{method}/{criterion}/seed {seed} failed: {e}");
                        (f64::NAN, 0.0, format!("error: {e}"))
                    }
                };
                rows.push(BenchmarkRow {
                    method,
                    criterion,
                    r: spec.r,
                    k,
                    p,
                    seed,
                    rmse,
                    svd_seconds,
                    total_seconds,
                    peak_bytes,
                    status,
                });
            }
        }
    }
    BenchmarkReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        let a = DenseMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = DenseMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f64 - 2.5);
        assert!((rmse(&a, &b).unwrap() - 2.5).abs() < 1e-15);
        // Entries {0, 1, 0, 1} against all ones: two unit errors out of four.
        let fom = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let rom = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!((rmse(&fom, &rom).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&a, &DenseMatrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn truncation_rank() {
        assert_eq!(svd_rank(Criterion::Early, 20, 97), 20);
        assert_eq!(svd_rank(Criterion::Integral, 20, 97), 40);
        assert_eq!(svd_rank(Criterion::Kou, 20, 30), 29);
    }

    #[test]
    fn sketch_overrides() {
        let mut spec = BenchmarkSpec::new(vec![Method::RangeX1], vec![Criterion::Early], 5, vec![0]);
        assert_eq!(spec.sketch_config(Method::RangeX1, 0).k, 10);
        spec.k = Some(7);
        let c = spec.sketch_config(Method::RangeCorange, 0);
        assert_eq!((c.k, c.p), (7, 15));
    }
}
