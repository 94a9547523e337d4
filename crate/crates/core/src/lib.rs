//! Polished half-space and subspace depths for location, regression, GLM and
//! covariance problems, computed by projected first-order optimization with
//! annealed sigmoid surrogates, plus exact low-dimensional oracles.

pub mod bench;
pub mod cli;
pub mod deepest;
pub mod error;
pub mod influence;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod phi;
pub mod projections;
pub mod solver;

pub use error::{DepthError, Result};
pub use influence::{
    covariance_influences, glm_influences, location_influences, meta_influences, normalize_influences,
    regression_influences, triangle_objective, GlmFamily, MetaBlock,
};
pub use model::{
    evaluate_d01, Dataset, DepthResult, Direction, InfluenceSet, InfluenceSpace, LinearConstraint, SignConvention,
    SolverConfig,
};
pub use phi::{PhiFamily, PhiFunction};
pub use solver::{accelerated_solve, objective_and_grad, sap, subspace_solve};
