use std::f64::consts::PI;

use super::SweError;

pub const EARTH_RADIUS: f64 = 6.4e6;
pub const GRAVITY: f64 = 9.8;
pub const ROTATION_RATE: f64 = 2.0 * PI / 86400.0;

/// Regular longitude-latitude grid without the poles.
///
/// Fields on the grid are stored latitude-major: the value at longitude
/// index `i` and latitude index `j` lives at `j * n_phi + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    pub n_phi: usize,
    pub n_theta: usize,
    pub dphi: f64,
    pub dtheta: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub rho: f64,
    pub gravity: f64,
    pub rotation: f64,
    lat_deg: (f64, f64),
    bottom: Vec<f64>,
    bottom_dphi: Vec<f64>,
    bottom_dtheta: Vec<f64>,
}

impl SphericalGrid {
    /// Grid with `n_phi` longitudes covering the full circle and `n_theta`
    /// latitudes from `lat_min_deg` to `lat_max_deg` inclusive, flat bottom.
    pub fn new(n_phi: usize, n_theta: usize, lat_min_deg: f64, lat_max_deg: f64) -> Result<Self, SweError> {
        if n_phi < 3 || n_theta < 3 {
            return Err(SweError::InvalidGrid(format!(
                "need at least 3 points per direction, got {n_phi}x{n_theta}"
            )));
        }
        if !(lat_min_deg > -90.0 && lat_max_deg < 90.0 && lat_min_deg < lat_max_deg) {
            return Err(SweError::InvalidGrid(format!(
                "latitude range [{lat_min_deg}, {lat_max_deg}] must lie strictly inside (-90, 90)"
            )));
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let lat_min = lat_min_deg.to_radians();
        let lat_max = lat_max_deg.to_radians();
        let dtheta = (lat_max - lat_min) / (n_theta - 1) as f64;
        let phi = (0..n_phi).map(|i| i as f64 * dphi).collect();
        let theta = (0..n_theta)
            .map(|j| if j == n_theta - 1 { lat_max } else { lat_min + j as f64 * dtheta })
            .collect();
        let n = n_phi * n_theta;
        Ok(SphericalGrid {
            n_phi,
            n_theta,
            dphi,
            dtheta,
            phi,
            theta,
            rho: EARTH_RADIUS,
            gravity: GRAVITY,
            rotation: ROTATION_RATE,
            lat_deg: (lat_min_deg, lat_max_deg),
            bottom: vec![0.0; n],
            bottom_dphi: vec![0.0; n],
            bottom_dtheta: vec![0.0; n],
        })
    }

    /// The 360 x 160 grid over [-79.5°, 79.5°].
    pub fn full() -> Self {
        Self::new(360, 160, -79.5, 79.5).expect("valid default grid")
    }

    /// Replaces the bottom topography `H`. Only `H = 0` is validated.
    pub fn with_bottom(mut self, bottom: Vec<f64>) -> Result<Self, SweError> {
        if bottom.len() != self.len() {
            return Err(SweError::InvalidGrid(format!(
                "bottom has {} values, grid has {}",
                bottom.len(),
                self.len()
            )));
        }
        self.bottom_dphi = d_dphi(&self, &bottom);
        self.bottom_dtheta = d_dtheta(&self, &bottom);
        self.bottom = bottom;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n_phi * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_phi + i
    }

    pub fn bottom(&self) -> &[f64] {
        &self.bottom
    }

    /// `ζ = ρ + H` at a cell.
    #[inline]
    pub fn zeta(&self, k: usize) -> f64 {
        self.rho + self.bottom[k]
    }

    #[inline]
    pub(crate) fn bottom_gradient(&self, k: usize) -> (f64, f64) {
        (self.bottom_dphi[k], self.bottom_dtheta[k])
    }

    /// Coriolis parameter `F = 2 f sin θ` on latitude row `j`.
    #[inline]
    pub fn coriolis(&self, j: usize) -> f64 {
        2.0 * self.rotation * self.theta[j].sin()
    }

    pub fn lat_min_deg(&self) -> f64 {
        self.lat_deg.0
    }

    pub fn lat_max_deg(&self) -> f64 {
        self.lat_deg.1
    }
}

/// Periodic central difference in longitude, per radian.
pub(crate) fn d_dphi(grid: &SphericalGrid, field: &[f64]) -> Vec<f64> {
    let np = grid.n_phi;
    let mut out = vec![0.0; field.len()];
    for j in 0..grid.n_theta {
        for i in 0..np {
            let e = field[j * np + (i + 1) % np];
            let w = field[j * np + (i + np - 1) % np];
            out[j * np + i] = (e - w) / (2.0 * grid.dphi);
        }
    }
    out
}

/// Central difference in latitude, per radian; zero on the boundary rows.
pub(crate) fn d_dtheta(grid: &SphericalGrid, field: &[f64]) -> Vec<f64> {
    let np = grid.n_phi;
    let mut out = vec![0.0; field.len()];
    for j in 1..grid.n_theta - 1 {
        for i in 0..np {
            let n = field[(j + 1) * np + i];
            let s = field[(j - 1) * np + i];
            out[j * np + i] = (n - s) / (2.0 * grid.dtheta);
        }
    }
    out
}
