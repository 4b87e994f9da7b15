//! Dynamic mode decomposition of shallow-water snapshots, with deterministic
//! and randomized (sketched) SVD stages.

pub mod dmd;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod select;
pub mod sketch;
pub mod swe;
