//! Variational models for images with values in Riemannian manifolds.
//!
//! The crate covers the circle, spheres, rotations (unit quaternions) and
//! symmetric positive definite matrices, and provides first- and
//! second-order priors (TV, second-order TV, infimal convolution and TGV
//! variants), their gradients, Armijo gradient descent solvers and an
//! extrinsic ADMM solver.

pub mod differences;
pub mod energies;
pub mod error;
pub mod euclid;
pub mod gradients;
pub mod image;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod manifold;
pub mod manifolds;
pub mod par;
pub mod point;
pub mod solvers;
mod terms;
pub mod transport;

pub use error::{Error, Result};
pub use image::{Axis, ManifoldImage, PixelGrid, TangentField};
pub use manifold::{adjoint_diff_map, diff_map, grad_dist_sq, jacobi_frame, DiffKind, JacobiFrame, LieGroup, Manifold};
