//! Spherical shallow-water solver used to generate snapshot data.

pub mod grid;
pub mod init;
pub mod simulate;
pub mod solver;
pub mod vorticity;

pub use grid::SphericalGrid;
pub use init::{draw_kappa, geostrophic_velocity, initial_height, KappaMode};
pub use simulate::{initial_state, simulate, FieldKind, SimConfig, SimOutput, SnapshotSet};
pub use solver::{apply_boundary, cfl_number, fluxes_and_sources, lax_wendroff_step, CellTerms, FlowState};
pub use vorticity::{vorticity, vorticity_of};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("config line {line}, key '{key}': {message}")]
    Config { line: usize, key: String, message: String },
    #[error("geostrophic denominator {denom:e} too small on latitude row {row}")]
    Geostrophic { row: usize, denom: f64 },
    #[error("non-positive depth {h} at cell ({i}, {j})")]
    NonPositiveDepth { i: usize, j: usize, h: f64 },
    #[error("solution blew up at t = {time} s in cell ({i}, {j}); last stable time {last_stable} s")]
    BlowUp { time: f64, i: usize, j: usize, last_stable: f64 },
}

impl SweError {
    pub(crate) fn config(line: usize, key: &str, message: impl Into<String>) -> Self {
        SweError::Config {
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }
}
