use std::f64::consts::PI;

use super::grid::{d_dphi, d_dtheta, SphericalGrid};
use super::SweError;
use crate::linalg::RngStream;

/// How the disturbance amplitude `κ ~ U(0, 1)` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaMode {
    /// One independent draw per grid point.
    #[default]
    PerPoint,
    /// One draw per latitude row, shared along longitude.
    PerLatitude,
    /// No disturbance.
    Zero,
}

/// Disturbance amplitudes for every grid point, from the `kappa` stream.
pub fn draw_kappa(grid: &SphericalGrid, seed: u64, mode: KappaMode) -> Vec<f64> {
    let mut stream = RngStream::named(seed, "kappa");
    match mode {
        KappaMode::PerPoint => (0..grid.len()).map(|_| stream.uniform()).collect(),
        KappaMode::PerLatitude => {
            let rows: Vec<f64> = (0..grid.n_theta).map(|_| stream.uniform()).collect();
            (0..grid.len()).map(|k| rows[k / grid.n_phi]).collect()
        }
        KappaMode::Zero => vec![0.0; grid.len()],
    }
}

/// Mean height profile plus the random disturbance, θ in radians.
pub fn initial_height(grid: &SphericalGrid, kappa: &[f64]) -> Vec<f64> {
    assert_eq!(kappa.len(), grid.len());
    let extent = grid.dtheta * (grid.n_theta - 1) as f64 / PI;
    let mut h = vec![0.0; grid.len()];
    for j in 0..grid.n_theta {
        let th = grid.theta[j];
        let base = 10000.0 - 60.0 * (4.0 * PI * th).cos() * (-th * th).exp();
        let bump = extent * grid.coriolis(j).abs() * 1e4 * th.cos();
        for i in 0..grid.n_phi {
            let k = grid.index(i, j);
            h[k] = base + kappa[k] * bump;
        }
    }
    h
}

/// Geostrophic velocities from the height field.
///
/// `∂h/∂θ` and `∂h/∂φ` are central differences per radian; `∂h/∂θ` is zero
/// on the two boundary rows, matching the slip condition there.
pub fn geostrophic_velocity(grid: &SphericalGrid, h: &[f64], delta: f64) -> Result<(Vec<f64>, Vec<f64>), SweError> {
    assert_eq!(h.len(), grid.len());
    let dh_dtheta = d_dtheta(grid, h);
    let dh_dphi = d_dphi(grid, h);
    let g = grid.gravity;
    let mut u_phi = vec![0.0; grid.len()];
    let mut u_theta = vec![0.0; grid.len()];
    for j in 0..grid.n_theta {
        let denom = grid.coriolis(j) - delta;
        if denom.abs() < 1e-15 {
            return Err(SweError::Geostrophic { row: j, denom });
        }
        let c = grid.theta[j].cos();
        for i in 0..grid.n_phi {
            let k = grid.index(i, j);
            let zeta = grid.zeta(k);
            u_phi[k] = -g / (zeta * denom) * dh_dtheta[k];
            u_theta[k] = g / (zeta * denom * c) * dh_dphi[k];
        }
    }
    Ok((u_phi, u_theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SphericalGrid {
        SphericalGrid::new(12, 9, -60.0, 60.0).unwrap()
    }

    #[test]
    fn undisturbed_height_at_equator() {
        let g = grid();
        let h = initial_height(&g, &vec![0.0; g.len()]);
        // Row 4 sits on the equator.
        assert!(g.theta[4].abs() < 1e-15);
        assert!((h[g.index(0, 4)] - 9940.0).abs() < 1e-9);
    }

    #[test]
    fn undisturbed_height_is_even_in_latitude() {
        let g = grid();
        let h = initial_height(&g, &vec![0.0; g.len()]);
        for j in 0..g.n_theta {
            let a = h[g.index(3, j)];
            let b = h[g.index(3, g.n_theta - 1 - j)];
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn undisturbed_height_at_quarter_pi() {
        let g = SphericalGrid::new(8, 3, -45.0, 45.0).unwrap();
        let h = initial_height(&g, &vec![0.0; g.len()]);
        let th = PI / 4.0;
        let want = 10000.0 - 60.0 * (PI * PI).cos() * (-(PI * PI) / 16.0).exp();
        assert!((h[g.index(0, 0)] - want).abs() < 1e-9);
        assert!((g.theta[0] + th).abs() < 1e-15);
    }

    #[test]
    fn disturbance_scales_with_kappa() {
        let g = grid();
        let h0 = initial_height(&g, &vec![0.0; g.len()]);
        let h1 = initial_height(&g, &vec![1.0; g.len()]);
        let j = 7;
        let th = g.theta[j];
        let want = g.dtheta * 8.0 / PI * (2.0 * g.rotation * th.sin()).abs() * 1e4 * th.cos();
        let k = g.index(5, j);
        assert!((h1[k] - h0[k] - want).abs() < 1e-9);
    }

    #[test]
    fn kappa_modes() {
        let g = grid();
        let k = draw_kappa(&g, 3, KappaMode::PerPoint);
        assert!(k.iter().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(k, draw_kappa(&g, 3, KappaMode::PerPoint));
        let rows = draw_kappa(&g, 3, KappaMode::PerLatitude);
        for j in 0..g.n_theta {
            assert!((0..g.n_phi).all(|i| rows[g.index(i, j)] == rows[g.index(0, j)]));
        }
        assert!(draw_kappa(&g, 3, KappaMode::Zero).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_height_is_at_rest() {
        let g = grid();
        let (u, v) = geostrophic_velocity(&g, &vec![5000.0; g.len()], 1e-7).unwrap();
        assert!(u.iter().chain(&v).all(|&x| x == 0.0));
    }

    #[test]
    fn zonal_height_has_no_meridional_wind() {
        let g = grid();
        let h = initial_height(&g, &vec![0.0; g.len()]);
        let (_, v) = geostrophic_velocity(&g, &h, 1e-7).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_height_single_point() {
        let g = grid();
        let slope = 250.0;
        let h: Vec<f64> = (0..g.len()).map(|k| 8000.0 + slope * g.theta[k / g.n_phi]).collect();
        let delta = 1e-7;
        let (u, _) = geostrophic_velocity(&g, &h, delta).unwrap();
        let j = 6;
        let c = 2.0 * (2.0 * PI / 86400.0) * g.theta[j].sin() - delta;
        let want = -9.8 * slope / (6.4e6 * c);
        let got = u[g.index(2, j)];
        assert!((got - want).abs() <= 1e-10 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn denominator_guard() {
        let g = grid();
        // Row 4 is the equator: F = 0, so delta = 0 hits the guard.
        assert!(matches!(
            geostrophic_velocity(&g, &vec![1.0; g.len()], 0.0),
            Err(SweError::Geostrophic { row: 4, .. })
        ));
    }
}
