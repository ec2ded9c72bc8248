//! Armijo gradient descent, tangent-bundle descent and extrinsic ADMM.

pub mod admm;
pub mod descent;
pub mod init;

pub use admm::{admm_extrinsic, AdmmParams, AdmmReport};
pub use descent::{
    armijo_descent, euclidean_descent, gradient_descent, gradient_descent_tangent_bundle, DescentParams, DescentProblem,
    ProgressEvent, SolverReport, StepRecord, StopReason,
};
pub use init::{initial_state, karcher_mean};
