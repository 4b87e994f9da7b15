//! Two-stage Lax-Wendroff scheme for the spherical shallow-water system
//! written in conservative variables `q = [h, h u_φ, h u_θ]`.
//!
//! One step:
//! 1. half step to the edge midpoints `(i+½, j)` (all rows, periodic in φ)
//!    and `(i, j+½)` (between adjacent rows);
//! 2. full step for `q̃` on interior rows from the midpoint fluxes;
//! 3. primitive update adding the source terms evaluated at the old time;
//! 4. boundary rows are rebuilt by [`apply_boundary`].
//!
//! The φ-flux metric `1/(ρ cos θ)` uses the latitude of the row being
//! updated; the θ-flux metric is `1/ρ` with no latitude dependence.

use super::grid::SphericalGrid;
use super::SweError;

const BLOWUP: f64 = 1e8;

/// Primitive fields on the grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub h: Vec<f64>,
    pub u_phi: Vec<f64>,
    pub u_theta: Vec<f64>,
    pub time: f64,
}

impl FlowState {
    pub fn at_rest(grid: &SphericalGrid, depth: f64) -> Self {
        FlowState {
            h: vec![depth; grid.len()],
            u_phi: vec![0.0; grid.len()],
            u_theta: vec![0.0; grid.len()],
            time: 0.0,
        }
    }
}

/// Flux, flux and source vectors of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTerms {
    pub f: [f64; 3],
    pub g: [f64; 3],
    /// `h [α, β, γ]`.
    pub src: [f64; 3],
}

#[inline]
fn flux_phi(q: [f64; 3], g: f64) -> [f64; 3] {
    let u = q[1] / q[0];
    let v = q[2] / q[0];
    [q[1], q[1] * u + 0.5 * g * q[0] * q[0], q[1] * v]
}

#[inline]
fn flux_theta(q: [f64; 3], g: f64) -> [f64; 3] {
    let v = q[2] / q[0];
    [q[2], q[1] * v, q[2] * v + 0.5 * g * q[0] * q[0]]
}

/// Source rates `[α, β, γ]` per unit depth.
#[inline]
#[allow(clippy::too_many_arguments)]
fn source_rates(u: f64, v: f64, theta: f64, zeta: f64, coriolis: f64, g: f64, dh_phi: f64, dh_theta: f64) -> [f64; 3] {
    let t = theta.tan();
    let c = theta.cos();
    let alpha = v * t / zeta;
    let beta = coriolis * v - g / (zeta * c) * dh_phi + u * v / zeta * t;
    let gamma = -coriolis * u - g / zeta * dh_theta + u * u / zeta * t;
    [alpha, beta, gamma]
}

/// Fluxes and sources for the conservative state `q` of cell `(i, j)`.
pub fn fluxes_and_sources(q: [f64; 3], grid: &SphericalGrid, i: usize, j: usize) -> Result<CellTerms, SweError> {
    let k = grid.index(i, j);
    if !(q[0] > 0.0) {
        return Err(SweError::NonPositiveDepth { i, j, h: q[0] });
    }
    let (dh_phi, dh_theta) = grid.bottom_gradient(k);
    let r = source_rates(
        q[1] / q[0],
        q[2] / q[0],
        grid.theta[j],
        grid.zeta(k),
        grid.coriolis(j),
        grid.gravity,
        dh_phi,
        dh_theta,
    );
    Ok(CellTerms {
        f: flux_phi(q, grid.gravity),
        g: flux_theta(q, grid.gravity),
        src: [q[0] * r[0], q[0] * r[1], q[0] * r[2]],
    })
}

/// Periodic wrap in φ is implicit in the indexing; this rebuilds the two
/// latitude boundary rows: `h` and `u_φ` copied from the adjacent interior
/// row, `u_θ = 0`.
pub fn apply_boundary(state: &mut FlowState, grid: &SphericalGrid) {
    let np = grid.n_phi;
    let last = grid.n_theta - 1;
    for (dst, src) in [(0, 1), (last, last - 1)] {
        for i in 0..np {
            state.h[dst * np + i] = state.h[src * np + i];
            state.u_phi[dst * np + i] = state.u_phi[src * np + i];
            state.u_theta[dst * np + i] = 0.0;
        }
    }
}

/// Advances `state` by `dt` seconds.
pub fn lax_wendroff_step(state: &FlowState, dt: f64, grid: &SphericalGrid) -> Result<FlowState, SweError> {
    let np = grid.n_phi;
    let nt = grid.n_theta;
    let n = grid.len();
    let rho = grid.rho;
    let g = grid.gravity;
    let dphi = grid.dphi;
    let dtheta = grid.dtheta;

    let q: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let h = state.h[k];
            [h, h * state.u_phi[k], h * state.u_theta[k]]
        })
        .collect();
    let fc: Vec<[f64; 3]> = q.iter().map(|&c| flux_phi(c, g)).collect();
    let gc: Vec<[f64; 3]> = q.iter().map(|&c| flux_theta(c, g)).collect();

    // Half step at (i+1/2, j), stored at j*np + i.
    let mut fx = vec![[0.0; 3]; n];
    for j in 0..nt {
        let c = grid.theta[j].cos();
        for i in 0..np {
            let a = j * np + i;
            let b = j * np + (i + 1) % np;
            let mut qm = [0.0; 3];
            for s in 0..3 {
                qm[s] = (q[a][s] + q[b][s]) / 2.0 - dt / 2.0 * (1.0 / (rho * c)) * ((fc[b][s] - fc[a][s]) / dphi);
            }
            fx[a] = flux_phi(qm, g);
        }
    }
    // Half step at (i, j+1/2), stored at j*np + i.
    let mut gy = vec![[0.0; 3]; (nt - 1) * np];
    for j in 0..nt - 1 {
        for i in 0..np {
            let a = j * np + i;
            let b = a + np;
            let mut qm = [0.0; 3];
            for s in 0..3 {
                qm[s] = (q[a][s] + q[b][s]) / 2.0 - dt / 2.0 * (1.0 / rho) * ((gc[b][s] - gc[a][s]) / dtheta);
            }
            gy[a] = flux_theta(qm, g);
        }
    }

    let mut next = state.clone();
    next.time = state.time + dt;
    for j in 1..nt - 1 {
        let th = grid.theta[j];
        let c = th.cos();
        let coriolis = grid.coriolis(j);
        for i in 0..np {
            let k = j * np + i;
            let west = j * np + (i + np - 1) % np;
            let south = k - np;
            let mut qt = [0.0; 3];
            for s in 0..3 {
                qt[s] = q[k][s]
                    + dt * (-(1.0 / (rho * c)) * ((fx[k][s] - fx[west][s]) / dphi)
                        - (1.0 / rho) * ((gy[k][s] - gy[south][s]) / dtheta));
            }
            let (dh_phi, dh_theta) = grid.bottom_gradient(k);
            let h0 = state.h[k];
            let r = source_rates(
                state.u_phi[k],
                state.u_theta[k],
                th,
                grid.zeta(k),
                coriolis,
                g,
                dh_phi,
                dh_theta,
            );
            let h1 = qt[0] + dt / 2.0 * r[0] * (qt[0] + h0);
            next.h[k] = h1;
            next.u_phi[k] = (qt[1] + dt / 2.0 * r[1] * (h1 + h0)) / h1;
            next.u_theta[k] = (qt[2] + dt / 2.0 * r[2] * (h1 + h0)) / h1;
        }
    }
    apply_boundary(&mut next, grid);
    check_state(&next, grid, state.time)?;
    Ok(next)
}

/// Fails on non-finite values, magnitudes above 1e8 or non-positive depth.
pub fn check_state(state: &FlowState, grid: &SphericalGrid, last_stable: f64) -> Result<(), SweError> {
    for k in 0..grid.len() {
        let h = state.h[k];
        let bad = !(h > 0.0)
            || !(h.abs() <= BLOWUP)
            || !(state.u_phi[k].abs() <= BLOWUP)
            || !(state.u_theta[k].abs() <= BLOWUP);
        if bad {
            return Err(SweError::BlowUp {
                time: state.time,
                i: k % grid.n_phi,
                j: k / grid.n_phi,
                last_stable,
            });
        }
    }
    Ok(())
}

/// `Δt · max(|u| + √(g h)) / (ρ · min(Δφ cos θ_max, Δθ))`, with `θ_max`
/// the largest latitude magnitude on the grid.
pub fn cfl_number(state: &FlowState, grid: &SphericalGrid, dt: f64) -> f64 {
    let mut speed = 0.0_f64;
    for k in 0..grid.len() {
        let u = state.u_phi[k].hypot(state.u_theta[k]);
        speed = speed.max(u + (grid.gravity * state.h[k]).sqrt());
    }
    let theta_max = grid.theta.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let dx = (grid.dphi * theta_max.cos()).min(grid.dtheta);
    dt * speed / (grid.rho * dx)
}
