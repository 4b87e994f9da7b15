use super::grid::SphericalGrid;
use super::solver::FlowState;

/// Relative vorticity `ω = (1/(ρ cos θ)) [∂u_θ/∂φ − ∂(u_φ cos θ)/∂θ]`.
///
/// Central differences everywhere in φ (periodic) and on interior rows in
/// θ. On the two boundary rows the slip condition `∂u_φ/∂θ = 0` turns the
/// second term into `−u_φ sin θ`.
pub fn vorticity(state: &FlowState, grid: &SphericalGrid) -> Vec<f64> {
    vorticity_of(&state.u_phi, &state.u_theta, grid)
}

pub fn vorticity_of(u_phi: &[f64], u_theta: &[f64], grid: &SphericalGrid) -> Vec<f64> {
    let np = grid.n_phi;
    let nt = grid.n_theta;
    let rho = grid.rho;
    let mut out = vec![0.0; grid.len()];
    for j in 0..nt {
        let th = grid.theta[j];
        let c = th.cos();
        for i in 0..np {
            let k = j * np + i;
            let dv = (u_theta[j * np + (i + 1) % np] - u_theta[j * np + (i + np - 1) % np]) / (2.0 * grid.dphi);
            let du = if j == 0 || j == nt - 1 {
                -u_phi[k] * th.sin()
            } else {
                let north = u_phi[k + np] * grid.theta[j + 1].cos();
                let south = u_phi[k - np] * grid.theta[j - 1].cos();
                (north - south) / (2.0 * grid.dtheta)
            };
            out[k] = (1.0 / (rho * c)) * (dv - du);
        }
    }
    out
}
