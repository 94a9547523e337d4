//! Optimization engine for polished depths.

pub mod accelerated;
pub mod init;
pub mod mm;
pub mod objective;
pub mod sap;
pub mod subspace;
pub mod trace;

pub use accelerated::{accelerate, accelerated_solve, bregman, d2, next_theta, AccelParams};
pub use init::{init_directions, random_frames, spherical_pca_direction, InitDirections};
pub use mm::{mm_solve, mm_step, surrogate, MmStep};
pub use objective::{objective_and_grad, Objective, PhiObjective, ProductObjective, TriangleObjective};
pub use sap::{anneal, influence_scale, sap, sap_with_starts, StartOutcome};
pub use subspace::{subspace_solve, triangle_depth};
pub use trace::{AccelTrace, IterRecord, IterateRecord, SolverTrace};
