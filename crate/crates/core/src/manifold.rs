//! The manifold interface and the Jacobi-field differential engine.
//!
//! Points and tangent vectors are plain coordinate slices in the manifold's
//! storage representation. Every manifold here is a symmetric space, so the
//! curvature operator `R(., γ')γ'` is parallel along geodesics and can be
//! diagonalized once at the start point; the differentials of `exp`, `log`
//! and geodesic evaluation then act diagonally in that frame.

use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::{axpy, scale};

/// Membership tolerance for stored points and tangent vectors.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Smallest admissible `|sin √κ|` before a conjugate point is reported.
pub const CONJUGATE_TOL: f64 = 1e-8;

/// A Riemannian manifold with closed-form geodesic maps.
pub trait Manifold: Send + Sync + fmt::Debug {
    /// Short tag, e.g. `s2`, `so3`, `spd3`.
    fn name(&self) -> String;
    /// Intrinsic dimension.
    fn dim(&self) -> usize;
    /// Length of the coordinate vector of a point (and of a tangent vector).
    fn point_len(&self) -> usize;

    fn check_point(&self, x: &[f64], tol: f64) -> Result<()>;
    fn check_tangent(&self, x: &[f64], v: &[f64], tol: f64) -> Result<()>;

    /// Riemannian inner product at `x`.
    fn inner(&self, x: &[f64], v: &[f64], w: &[f64]) -> f64;

    fn norm(&self, x: &[f64], v: &[f64]) -> f64 {
        self.inner(x, v, v).max(0.0).sqrt()
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> f64;
    fn exp(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
    fn log(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>>;

    /// `γ(x, y; t) = exp_x(t log_x y)`, valid for any real `t`.
    fn geodesic(&self, x: &[f64], y: &[f64], t: f64) -> Result<Vec<f64>> {
        let v = self.log(x, y)?;
        Ok(self.exp(x, &scale(&v, t)))
    }

    /// Parallel transport of `w ∈ T_x` along `s ↦ exp_x(s v)` for `s` from 0 to `t`.
    fn transport_along(&self, x: &[f64], v: &[f64], t: f64, w: &[f64]) -> Vec<f64>;

    /// Closed-form parallel transport of `w ∈ T_x` to `T_y` along the minimizing geodesic.
    fn parallel_transport(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>>;

    /// Orthonormal frame at `x` diagonalizing `R(., v)v`, eigenvalues include `‖v‖²`.
    fn frame_along(&self, x: &[f64], v: &[f64]) -> JacobiFrame;

    /// Orthonormal basis of `T_x`.
    fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>>;

    /// Orthogonal projection of an ambient vector onto `T_x`.
    fn project_tangent(&self, x: &[f64], v: &[f64]) -> Vec<f64>;

    /// Removes representation drift from a nearly valid point.
    fn normalize(&self, x: &[f64]) -> Vec<f64>;

    fn random_point(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// Length of the extrinsic embedding used by the ADMM solver.
    fn embedding_len(&self) -> usize {
        self.point_len()
    }

    fn embed(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    /// Nearest point projection from embedding coordinates.
    fn project_embedded(&self, raw: &[f64]) -> Result<Vec<f64>>;

    fn as_lie_group(&self) -> Option<&dyn LieGroup> {
        None
    }
}

/// Group structure on a manifold whose metric is bi-invariant.
///
/// Tangent maps return vectors at the stored (canonical) representative of
/// the translated point.
pub trait LieGroup: Manifold {
    fn identity(&self) -> Vec<f64>;
    fn compose(&self, a: &[f64], b: &[f64]) -> Vec<f64>;
    fn inverse(&self, a: &[f64]) -> Vec<f64>;
    /// `D L_g(a)[v]`, a tangent at `g ∘ a`.
    fn left_translate_tangent(&self, g: &[f64], a: &[f64], v: &[f64]) -> Vec<f64>;
    /// `D R_g(a)[v]`, a tangent at `a ∘ g`.
    fn right_translate_tangent(&self, g: &[f64], a: &[f64], v: &[f64]) -> Vec<f64>;
    /// Differential of inversion at `a`, a tangent at `a⁻¹`.
    fn inverse_tangent(&self, a: &[f64], v: &[f64]) -> Vec<f64>;
}

/// Parallel orthonormal frame diagonalizing the curvature along a geodesic.
#[derive(Clone, Debug)]
pub struct JacobiFrame {
    pub basis: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub speed: f64,
}

/// Frame along the geodesic from `x` to `y`.
pub fn jacobi_frame(m: &dyn Manifold, x: &[f64], y: &[f64]) -> Result<JacobiFrame> {
    let v = m.log(x, y)?;
    Ok(m.frame_along(x, &v))
}

/// The six maps whose differentials are available in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiffKind {
    /// `x ↦ exp_x(u)`, with `u` parallel along the variation.
    ExpInPoint,
    /// `x ↦ log_x(y)`.
    LogInBase,
    /// `x ↦ log_y(x)`.
    LogInArgument,
    /// `x ↦ γ(x, y; τ)`.
    GeodesicInX,
    /// `x ↦ γ(y, x; τ)`.
    GeodesicInY,
    /// `u ↦ exp_x(u)`.
    ExpInTangent,
}

impl DiffKind {
    pub const ALL: [DiffKind; 6] = [
        DiffKind::ExpInPoint,
        DiffKind::LogInBase,
        DiffKind::LogInArgument,
        DiffKind::GeodesicInX,
        DiffKind::GeodesicInY,
        DiffKind::ExpInTangent,
    ];

    fn uses_tangent_argument(self) -> bool {
        matches!(self, DiffKind::ExpInPoint | DiffKind::ExpInTangent)
    }
}

fn check_conjugate(kappa: f64) -> Result<()> {
    if kappa > 0.0 {
        let s = kappa.sqrt().sin().abs();
        if s < CONJUGATE_TOL {
            return Err(Error::ConjugatePoint(s));
        }
    }
    Ok(())
}

/// `sin(a√κ)/sin(√κ)` continued to `κ ≤ 0`.
fn sin_ratio(a: f64, kappa: f64) -> Result<f64> {
    if kappa.abs() < 1e-8 {
        return Ok(a * (1.0 + (1.0 - a * a) * kappa / 6.0));
    }
    check_conjugate(kappa)?;
    let s = kappa.abs().sqrt();
    Ok(if kappa > 0.0 { (a * s).sin() / s.sin() } else { (a * s).sinh() / s.sinh() })
}

fn alpha(kind: DiffKind, tau: f64, kappa: f64) -> Result<f64> {
    let small = kappa.abs() < 1e-8;
    let s = kappa.abs().sqrt();
    match kind {
        DiffKind::ExpInPoint => Ok(if small {
            1.0 - kappa / 2.0
        } else if kappa > 0.0 {
            s.cos()
        } else {
            s.cosh()
        }),
        DiffKind::LogInBase => {
            if small {
                return Ok(-(1.0 - kappa / 3.0));
            }
            check_conjugate(kappa)?;
            Ok(if kappa > 0.0 { -s * s.cos() / s.sin() } else { -s * s.cosh() / s.sinh() })
        }
        DiffKind::LogInArgument => {
            if small {
                return Ok(1.0 + kappa / 6.0);
            }
            check_conjugate(kappa)?;
            Ok(if kappa > 0.0 { s / s.sin() } else { s / s.sinh() })
        }
        DiffKind::GeodesicInX => sin_ratio(1.0 - tau, kappa),
        DiffKind::GeodesicInY => sin_ratio(tau, kappa),
        DiffKind::ExpInTangent => Ok(if small {
            1.0 - kappa / 6.0
        } else if kappa > 0.0 {
            s.sin() / s
        } else {
            s.sinh() / s
        }),
    }
}

/// A linearized map `T_x M → T_{F(x)} M` in diagonal Jacobi form, reusable
/// for several inputs and for its adjoint.
#[derive(Clone, Debug)]
pub struct Differential<'a> {
    m: &'a dyn Manifold,
    x: Vec<f64>,
    vel: Vec<f64>,
    t_end: f64,
    frame: JacobiFrame,
    alphas: Vec<f64>,
    end: Vec<f64>,
}

impl<'a> Differential<'a> {
    /// `arg` is the tangent `u ∈ T_x` for the exp kinds and the fixed point
    /// `y` otherwise.
    pub fn new(m: &'a dyn Manifold, kind: DiffKind, x: &[f64], arg: &[f64], tau: f64) -> Result<Self> {
        let vel = if kind.uses_tangent_argument() { arg.to_vec() } else { m.log(x, arg)? };
        let t_end = match kind {
            DiffKind::ExpInPoint | DiffKind::LogInArgument | DiffKind::ExpInTangent => 1.0,
            DiffKind::LogInBase => 0.0,
            DiffKind::GeodesicInX => tau,
            DiffKind::GeodesicInY => 1.0 - tau,
        };
        let frame = m.frame_along(x, &vel);
        let alphas = frame.kappa.iter().map(|&k| alpha(kind, tau, k)).collect::<Result<Vec<_>>>()?;
        let end = if t_end == 0.0 { x.to_vec() } else { m.exp(x, &scale(&vel, t_end)) };
        Ok(Differential { m, x: x.to_vec(), vel, t_end, frame, alphas, end })
    }

    /// Base point of the output space.
    pub fn end_point(&self) -> &[f64] {
        &self.end
    }

    pub fn frame(&self) -> &JacobiFrame {
        &self.frame
    }

    fn diagonal(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (b, a) in self.frame.basis.iter().zip(&self.alphas) {
            let c = self.m.inner(&self.x, v, b);
            axpy(&mut out, c * a, b);
        }
        out
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let y0 = self.diagonal(input);
        if self.t_end == 0.0 {
            y0
        } else {
            self.m.transport_along(&self.x, &self.vel, self.t_end, &y0)
        }
    }

    pub fn adjoint(&self, w: &[f64]) -> Vec<f64> {
        let w0 = if self.t_end == 0.0 {
            w.to_vec()
        } else {
            let vel_end = self.m.transport_along(&self.x, &self.vel, self.t_end, &self.vel);
            self.m.transport_along(&self.end, &scale(&vel_end, -1.0), self.t_end, w)
        };
        self.diagonal(&w0)
    }
}

/// `DF(x)[input]` for the map selected by `kind`.
pub fn diff_map(m: &dyn Manifold, kind: DiffKind, x: &[f64], arg: &[f64], tau: f64, input: &[f64]) -> Result<Vec<f64>> {
    Ok(Differential::new(m, kind, x, arg, tau)?.apply(input))
}

/// `DF(x)*[w]` with respect to the Riemannian metrics at `x` and `F(x)`.
pub fn adjoint_diff_map(m: &dyn Manifold, kind: DiffKind, x: &[f64], arg: &[f64], tau: f64, w: &[f64]) -> Result<Vec<f64>> {
    Ok(Differential::new(m, kind, x, arg, tau)?.adjoint(w))
}

/// Riemannian gradient of `dist²(·, y)` at `x`.
pub fn grad_dist_sq(m: &dyn Manifold, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    Ok(scale(&m.log(x, y)?, -2.0))
}

/// A standard normal tangent vector in an orthonormal frame at `x`.
pub fn random_tangent(m: &dyn Manifold, x: &[f64], sigma: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut v = vec![0.0; m.point_len()];
    for b in m.tangent_basis(x) {
        let eta: f64 = StandardNormal.sample(rng);
        axpy(&mut v, sigma * eta, &b);
    }
    v
}
