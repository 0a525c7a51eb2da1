//! Simulation of scalar Stratonovich SDEs that become stiff near a stable
//! stationary point, and the variable transformation that removes that
//! stiffness.
//!
//! The building blocks are:
//!
//! * [`sde`]: the [`SdeModel`] type and Itô/Stratonovich conversion,
//! * [`brownian`]: seeded Brownian paths that coarsen exactly,
//! * [`models`]: the protein kinetic equation, its transformed form and the
//!   linear test equation,
//! * [`transform`]: the generic stiffness-reducing change of variables,
//! * [`integrators`]: explicit Euler and the fixed-point midpoint rule,
//! * [`analysis`]: Lyapunov estimates, error norms and convergence orders,
//! * [`experiments`]: figure presets, CSV output and run manifests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod brownian;
pub mod error;
pub mod experiments;
pub mod integrators;
pub mod models;
pub mod sde;
pub mod trajectory;
pub mod transform;

pub use analysis::{
    empirical_order, lyapunov_estimate, lyapunov_midpoint_linear, ms_error, oscillation_metric,
    sup_error, LyapunovEstimate,
};
pub use brownian::{coarsen, sample_brownian_grid, BrownianGrid};
pub use error::{Error, Result};
pub use integrators::{euler_step, integrate, midpoint_step, MidpointOptions, MidpointStep, Scheme};
pub use models::{
    build_linear_model, build_protein_model, build_transformed_protein_model,
    exact_linear_solution, LinearParams, ProteinParams,
};
pub use sde::{stratonovich_to_ito, Calculus, Coefficients, Domain, SdeModel};
pub use trajectory::Trajectory;
pub use transform::{
    check_branch, linearize_at, make_transform, transform_model, Branch, BranchReport,
    TransformPair,
};
