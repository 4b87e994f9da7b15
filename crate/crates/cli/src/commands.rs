use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use sketchydmd::dmd::{DmdError, DmdModel};
use sketchydmd::eval::{run_benchmark, svd_rank, BenchmarkSpec};
use sketchydmd::io::{export_csv, load_model, read_snapshots, save_model, write_real, write_snapshots, IoError};
use sketchydmd::linalg::DenseMatrix;
use sketchydmd::select::{select_modes, Criterion, SelectOptions};
use sketchydmd::sketch::{Method, SketchConfig};
use sketchydmd::swe::{simulate as run_solver, SimConfig, SnapshotSet, SweError};

use crate::{BenchmarkArgs, DmdArgs, ReconstructArgs};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Solver(String),
    Param(String),
    Range(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Param(_) => 4,
            CliError::Range(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Solver(m) | CliError::Param(m) | CliError::Range(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SweError> for CliError {
    fn from(e: SweError) -> Self {
        match e {
            SweError::Config { .. } | SweError::InvalidGrid(_) => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<DmdError> for CliError {
    fn from(e: DmdError) -> Self {
        match e {
            DmdError::Linalg(_) | DmdError::InvalidModel(_) => CliError::Solver(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn simulate(config: &Path, out: &Path) -> Result<()> {
    let cfg = SimConfig::from_path(config)?;
    let start = Instant::now();
    let result = run_solver(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    write_snapshots(out, &result.snapshots)?;
    let x = &result.snapshots.x;
    println!("n = {}", x.rows());
    println!("m = {}", x.cols());
    println!("steps = {}", result.steps);
    println!("max_cfl = {:.4}", result.max_cfl);
    println!("wall_seconds = {wall:.2}");
    Ok(())
}

/// Sketch sizes for `method` with optional overrides; a `k` override
/// without `p` sets `p = 2k + 1`.
fn sketch_config(method: Method, r: usize, seed: u64, k: Option<usize>, p: Option<usize>) -> SketchConfig {
    let mut cfg = SketchConfig::for_method(method, r, seed);
    if let Some(k) = k {
        cfg.k = k;
        cfg.p = 2 * k + 1;
    }
    if let Some(p) = p {
        cfg.p = p;
    }
    cfg
}

fn print_spectrum(model: &DmdModel, selected: &[usize]) {
    println!("{:>5} {:>12} {:>10} {:>13} {:>11} {:>12}", "mode", "|lambda|", "arg", "sigma_1/s", "period_h", "|b|");
    for (pos, &i) in selected.iter().enumerate() {
        let l = model.lambda[pos];
        let a = model.alpha[pos];
        let period = if a.im.abs() > 0.0 {
            2.0 * std::f64::consts::PI / a.im.abs() / 3600.0
        } else {
            f64::INFINITY
        };
        println!(
            "{i:>5} {:>12.8} {:>10.5} {:>13.4e} {:>11.3} {:>12.4e}",
            l.norm(),
            l.arg(),
            a.re,
            period,
            model.b[pos].norm()
        );
    }
}

pub fn dmd(a: &DmdArgs) -> Result<()> {
    let snaps = read_snapshots(&a.input)?;
    let x = &snaps.x;
    let (n, m) = x.shape();
    let r = a.modes;
    if r == 0 {
        return Err(CliError::Param("--modes must be at least 1".into()));
    }
    let rank = a.rank.unwrap_or_else(|| svd_rank(a.criterion, r, m));
    if a.criterion == Criterion::Early && rank != r {
        return Err(CliError::Param(format!(
            "early truncation keeps exactly the SVD rank: need --rank {r}, got {rank}"
        )));
    }
    if rank < r {
        return Err(CliError::Param(format!("need --rank >= --modes, got {rank} < {r}")));
    }
    let cfg = sketch_config(a.method, r, a.seed, a.k, a.p);
    if a.method.is_sketched() || a.k.is_some() || a.p.is_some() {
        cfg.validate(a.method, n, m)?;
    }
    if !a.method.is_sketched() && (a.k.is_some() || a.p.is_some()) {
        log::warn!("--k and --p are ignored by the deterministic method");
    }

    let fit = a.method.fit(x, rank, &cfg, a.mode_kind, snaps.dt_sample())?;
    let q = fit.model.q();
    if q < r {
        log::warn!("only {q} modes available, keeping all of them");
    }
    let opts = SelectOptions {
        normalized_growth: a.normalized_growth,
    };
    let sel = select_modes(&fit.model, a.criterion, r.min(q), &x.column(0), opts)?;

    let provenance = format!(
        "method={} criterion={} rank={rank} modes={r} seed={} k={} p={} input={}",
        a.method,
        a.criterion,
        a.seed,
        cfg.k,
        cfg.p,
        a.input.display()
    );
    save_model(&a.out, &sel.model, &provenance)?;
    write_text(&a.out.join("selection.csv"), &sel.to_csv())?;

    println!(
        "{} / {}: R = {rank}, {} candidate modes, {} kept, svd {:.4} s",
        a.method,
        a.criterion,
        q,
        sel.selected.len(),
        fit.svd_seconds
    );
    print_spectrum(&sel.model, &sel.selected);
    Ok(())
}

pub fn reconstruct(a: &ReconstructArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let m = model.n_snapshots;
    let window = m.saturating_sub(1) as f64 * model.dt;
    let (x, times) = if a.all {
        let times: Vec<f64> = (0..m).map(|k| k as f64 * model.dt).collect();
        (model.reconstruct_window(m), times)
    } else {
        let slack = 1e-9 * window.max(model.dt);
        for &t in &a.times {
            if !t.is_finite() {
                return Err(CliError::Range(format!("time {t} is not finite")));
            }
            if !a.extrapolate && (t < -slack || t > window + slack) {
                return Err(CliError::Range(format!(
                    "time {t} s is outside the fitted window [0, {window}] s; pass --extrapolate to allow it"
                )));
            }
        }
        let cols: Vec<Vec<f64>> = a
            .times
            .iter()
            .map(|&t| {
                let rec = model.reconstruct(t);
                let norm = rec.values.iter().map(|v| v * v).sum::<f64>().sqrt();
                if rec.imag_norm > 1e-8 * norm.max(f64::MIN_POSITIVE) {
                    log::warn!("t = {t}: imaginary residue {:e} dropped", rec.imag_norm);
                }
                rec.values
            })
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        (DenseMatrix::from_columns(&refs), a.times.clone())
    };

    match &a.grid_from {
        Some(src) => {
            let like = read_snapshots(src)?;
            if like.grid.len() != x.rows() {
                return Err(CliError::Input(format!(
                    "{}: grid has {} points, model has {}",
                    src.display(),
                    like.grid.len(),
                    x.rows()
                )));
            }
            let uniform = times.windows(3).all(|w| ((w[2] - w[1]) - (w[1] - w[0])).abs() <= 1e-9 * model.dt);
            if !uniform {
                log::warn!("requested times are not evenly spaced; the sidecar records only the first spacing");
            }
            let t0 = like.times.first().copied().unwrap_or(0.0);
            let set = SnapshotSet {
                x,
                times: times.iter().map(|t| t0 + t).collect(),
                field: like.field,
                grid: like.grid,
            };
            write_snapshots(&a.out, &set)?;
            println!("wrote {} columns", set.x.cols());
        }
        None => {
            write_real(&a.out, &x)?;
            println!("wrote {} columns", x.cols());
        }
    }
    Ok(())
}

/// `0,3,5..8` style lists; `a..b` excludes `b`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| CliError::Param(format!("bad seed list entry '{part}'"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad(part))?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad(part))?;
                if hi <= lo {
                    return Err(bad(part));
                }
                seeds.extend(lo..hi);
            }
            None => seeds.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Param("no seeds given".into()));
    }
    Ok(seeds)
}

pub fn benchmark(a: &BenchmarkArgs) -> Result<()> {
    if a.modes == 0 {
        return Err(CliError::Param("--modes must be at least 1".into()));
    }
    let seeds = parse_seeds(&a.seeds)?;
    let snaps = read_snapshots(&a.input)?;
    let mut spec = BenchmarkSpec::new(a.methods.clone(), a.criteria.clone(), a.modes, seeds);
    spec.k = a.k;
    spec.p = a.p;
    spec.mode_kind = a.mode_kind;
    spec.select = SelectOptions {
        normalized_growth: a.normalized_growth,
    };
    let report = run_benchmark(&snaps.x, snaps.dt_sample(), &spec);
    write_text(&a.report, &report.to_csv())?;
    let failed = report.rows.iter().filter(|r| !r.is_ok()).count();
    println!("{} rows, {failed} failed", report.rows.len());
    for r in &report.rows {
        println!("{:<14} {:<9} seed {:<4} rmse {:.4e}  svd {:.4} s", r.method.name(), r.criterion.name(), r.seed, r.rmse, r.svd_seconds);
    }
    Ok(())
}

pub fn export(input: &Path, snapshot: usize, out: &Path) -> Result<()> {
    let snaps = read_snapshots(input)?;
    let m = snaps.x.cols();
    if snapshot == 0 || snapshot > m {
        return Err(CliError::Range(format!("snapshot {snapshot} is outside 1..={m}")));
    }
    let col = snaps.x.column(snapshot - 1);
    write_text(out, &export_csv(&snaps.grid, &col))?;
    println!("wrote {} points", col.len());
    Ok(())
}
