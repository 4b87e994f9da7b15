use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::grid::SphericalGrid;
use super::init::{draw_kappa, geostrophic_velocity, initial_height, KappaMode};
use super::solver::{apply_boundary, cfl_number, check_state, lax_wendroff_step, FlowState};
use super::vorticity::vorticity;
use super::SweError;
use crate::linalg::DenseMatrix;

const DAY: f64 = 86400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldKind {
    #[default]
    Vorticity,
    Height,
    UPhi,
    UTheta,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Vorticity => "vorticity",
            FieldKind::Height => "height",
            FieldKind::UPhi => "u_phi",
            FieldKind::UTheta => "u_theta",
        }
    }

    pub fn extract(self, state: &FlowState, grid: &SphericalGrid) -> Vec<f64> {
        match self {
            FieldKind::Vorticity => vorticity(state, grid),
            FieldKind::Height => state.h.clone(),
            FieldKind::UPhi => state.u_phi.clone(),
            FieldKind::UTheta => state.u_theta.clone(),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vorticity" => Ok(FieldKind::Vorticity),
            "height" => Ok(FieldKind::Height),
            "u_phi" => Ok(FieldKind::UPhi),
            "u_theta" => Ok(FieldKind::UTheta),
            other => Err(format!("unknown field '{other}'")),
        }
    }
}

/// Simulation settings. Defaults reproduce the full 360 x 160, six-day run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_phi: usize,
    pub n_theta: usize,
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub dt_sec: f64,
    pub total_days: f64,
    pub warmup_days: f64,
    pub sample_interval_sec: f64,
    pub seed: u64,
    pub delta: f64,
    pub field: FieldKind,
    pub kappa: KappaMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_phi: 360,
            n_theta: 160,
            lat_min_deg: -79.5,
            lat_max_deg: 79.5,
            dt_sec: 30.0,
            total_days: 6.0,
            warmup_days: 3.0,
            sample_interval_sec: 900.0,
            seed: 0,
            delta: 1e-7,
            field: FieldKind::Vorticity,
            kappa: KappaMode::PerPoint,
        }
    }
}

fn whole(x: f64, what: &str) -> Result<u64, SweError> {
    let r = x.round();
    if !(r >= 0.0) || (x - r).abs() > 1e-9 * r.max(1.0) {
        return Err(SweError::config(0, what, format!("{x} is not a whole number of time steps")));
    }
    Ok(r as u64)
}

impl SimConfig {
    /// The small 90 x 40 grid, two days with a one-day warm-up.
    pub fn desk() -> Self {
        SimConfig {
            n_phi: 90,
            n_theta: 40,
            total_days: 2.0,
            warmup_days: 1.0,
            ..Self::default()
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SweError> {
        let mut cfg = SimConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SweError::config(line_no, line, "expected 'key = value'"));
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |e: &dyn fmt::Display| SweError::config(line_no, key, format!("invalid value '{value}': {e}"));
            match key {
                "n_phi" => cfg.n_phi = value.parse().map_err(|e| bad(&e))?,
                "n_theta" => cfg.n_theta = value.parse().map_err(|e| bad(&e))?,
                "lat_min_deg" => cfg.lat_min_deg = value.parse().map_err(|e| bad(&e))?,
                "lat_max_deg" => cfg.lat_max_deg = value.parse().map_err(|e| bad(&e))?,
                "dt_sec" => cfg.dt_sec = value.parse().map_err(|e| bad(&e))?,
                "total_days" => cfg.total_days = value.parse().map_err(|e| bad(&e))?,
                "warmup_days" => cfg.warmup_days = value.parse().map_err(|e| bad(&e))?,
                "sample_interval_sec" => cfg.sample_interval_sec = value.parse().map_err(|e| bad(&e))?,
                "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
                "delta" => cfg.delta = value.parse().map_err(|e| bad(&e))?,
                "field" => cfg.field = value.parse().map_err(|e| bad(&e))?,
                _ => return Err(SweError::config(line_no, key, "unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, SweError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SweError::config(0, &path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        format!(
            "n_phi = {}\nn_theta = {}\nlat_min_deg = {}\nlat_max_deg = {}\ndt_sec = {}\ntotal_days = {}\n\
             warmup_days = {}\nsample_interval_sec = {}\nseed = {}\ndelta = {:e}\nfield = {}\n",
            self.n_phi,
            self.n_theta,
            self.lat_min_deg,
            self.lat_max_deg,
            self.dt_sec,
            self.total_days,
            self.warmup_days,
            self.sample_interval_sec,
            self.seed,
            self.delta,
            self.field
        )
    }

    pub fn validate(&self) -> Result<(), SweError> {
        SphericalGrid::new(self.n_phi, self.n_theta, self.lat_min_deg, self.lat_max_deg)
            .map_err(|e| SweError::config(0, "grid", e.to_string()))?;
        if !(self.dt_sec > 0.0) {
            return Err(SweError::config(0, "dt_sec", "must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(SweError::config(0, "delta", "must be positive"));
        }
        if !(self.warmup_days >= 0.0 && self.total_days > self.warmup_days) {
            return Err(SweError::config(0, "total_days", "must exceed warmup_days >= 0"));
        }
        if !(self.sample_interval_sec >= self.dt_sec) {
            return Err(SweError::config(0, "sample_interval_sec", "must be at least dt_sec"));
        }
        self.schedule().map(|_| ())
    }

    /// `(total steps, warm-up steps, steps between samples)`.
    fn schedule(&self) -> Result<(u64, u64, u64), SweError> {
        let total = whole(self.total_days * DAY / self.dt_sec, "total_days")?;
        let warm = whole(self.warmup_days * DAY / self.dt_sec, "warmup_days")?;
        let every = whole(self.sample_interval_sec / self.dt_sec, "sample_interval_sec")?;
        if every == 0 {
            return Err(SweError::config(0, "sample_interval_sec", "must be at least one step"));
        }
        Ok((total, warm, every))
    }

    /// Number of stored snapshots: samples from the end of the warm-up to
    /// the end of the run, both included.
    pub fn snapshot_count(&self) -> Result<usize, SweError> {
        let (total, warm, every) = self.schedule()?;
        Ok(((total - warm) / every + 1) as usize)
    }

    pub fn grid(&self) -> Result<SphericalGrid, SweError> {
        SphericalGrid::new(self.n_phi, self.n_theta, self.lat_min_deg, self.lat_max_deg)
    }
}

/// Snapshot matrix with one flattened field per column.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub x: DenseMatrix,
    pub times: Vec<f64>,
    pub field: FieldKind,
    pub grid: SphericalGrid,
}

impl SnapshotSet {
    pub fn dt_sample(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub snapshots: SnapshotSet,
    pub max_cfl: f64,
    pub steps: u64,
}

/// Initial state: disturbed height, geostrophic winds, boundary rows set.
pub fn initial_state(cfg: &SimConfig, grid: &SphericalGrid) -> Result<FlowState, SweError> {
    let kappa = draw_kappa(grid, cfg.seed, cfg.kappa);
    let h = initial_height(grid, &kappa);
    let (u_phi, u_theta) = geostrophic_velocity(grid, &h, cfg.delta)?;
    let mut state = FlowState {
        h,
        u_phi,
        u_theta,
        time: 0.0,
    };
    apply_boundary(&mut state, grid);
    check_state(&state, grid, 0.0)?;
    Ok(state)
}

pub fn simulate(cfg: &SimConfig) -> Result<SimOutput, SweError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let (total, warm, every) = cfg.schedule()?;
    let mut state = initial_state(cfg, &grid)?;

    let mut max_cfl = cfl_number(&state, &grid, cfg.dt_sec);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cfg.snapshot_count()?);
    let mut times = Vec::with_capacity(columns.capacity());
    if warm == 0 {
        columns.push(cfg.field.extract(&state, &grid));
        times.push(0.0);
    }
    let mut warned = false;
    for step in 1..=total {
        state = lax_wendroff_step(&state, cfg.dt_sec, &grid)?;
        state.time = step as f64 * cfg.dt_sec;
        let cfl = cfl_number(&state, &grid, cfg.dt_sec);
        max_cfl = max_cfl.max(cfl);
        if cfl >= 1.0 && !warned {
            log::warn!("CFL number {cfl:.3} >= 1 at t = {} s", state.time);
            warned = true;
        }
        if step >= warm && (step - warm) % every == 0 {
            columns.push(cfg.field.extract(&state, &grid));
            times.push(state.time);
        }
    }

    let m = columns.len();
    let x = DenseMatrix::from_fn(grid.len(), m, |i, j| columns[j][i]);
    Ok(SimOutput {
        snapshots: SnapshotSet {
            x,
            times,
            field: cfg.field,
            grid,
        },
        max_cfl,
        steps: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_counts() {
        assert_eq!(SimConfig::default().snapshot_count().unwrap(), 289);
        assert_eq!(SimConfig::desk().snapshot_count().unwrap(), 97);
        assert_eq!(SimConfig::default().grid().unwrap().len(), 57600);
        assert_eq!(SimConfig::desk().grid().unwrap().len(), 3600);
    }

    #[test]
    fn parse_round_trip() {
        let cfg = SimConfig {
            seed: 17,
            field: FieldKind::Height,
            ..SimConfig::desk()
        };
        assert_eq!(SimConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parse_comments_and_defaults() {
        let cfg = SimConfig::parse("# desk run\n\nn_phi = 90  # lon\nn_theta=40\n").unwrap();
        assert_eq!(cfg.n_phi, 90);
        assert_eq!(cfg.n_theta, 40);
        assert_eq!(cfg.dt_sec, 30.0);
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = SimConfig::parse("n_phi = 90\nbogus = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(SimConfig::parse("n_phi = ninety").is_err());
        assert!(SimConfig::parse("field = pressure").is_err());
        assert!(SimConfig::parse("dt_sec = 31").is_err());
        assert!(SimConfig::parse("warmup_days = 7").is_err());
        assert!(SimConfig::parse("n_phi 90").is_err());
    }

    #[test]
    fn short_run_samples_on_schedule() {
        let cfg = SimConfig {
            n_phi: 24,
            n_theta: 12,
            lat_min_deg: -66.0,
            lat_max_deg: 66.0,
            dt_sec: 60.0,
            total_days: 0.125,
            warmup_days: 0.0,
            sample_interval_sec: 1800.0,
            ..SimConfig::default()
        };
        let out = simulate(&cfg).unwrap();
        let s = &out.snapshots;
        assert_eq!(s.x.shape(), (288, 7));
        assert_eq!(s.times, vec![0.0, 1800.0, 3600.0, 5400.0, 7200.0, 9000.0, 10800.0]);
        assert_eq!(s.dt_sample(), 1800.0);
        assert!(out.max_cfl > 0.0 && out.max_cfl < 1.0);
        s.x.check_finite().unwrap();
    }
}
