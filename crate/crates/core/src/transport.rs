//! Ladder approximations of parallel transport and the adjoint chain of the
//! pole ladder.
//!
//! The pole ladder moves `ξ ∈ T_x` to `T_y` through the geodesic midpoint
//! `c` of `x, y`: it reflects `e = exp_x ξ` through `c` and reads off
//! `-log_y` of the reflected point. On symmetric spaces this is exactly the
//! parallel transport.

use crate::error::Result;
use crate::linalg::{axpy, scale};
use crate::manifold::{DiffKind, Differential, Manifold};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderScheme {
    Pole,
    Schild,
    ClosedForm,
}

/// Transport `xi ∈ T_x` to `T_y` with the chosen scheme.
pub fn transport(m: &dyn Manifold, scheme: LadderScheme, x: &[f64], y: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    match scheme {
        LadderScheme::Pole => pole_ladder(m, x, y, xi),
        LadderScheme::Schild => schild_ladder(m, x, y, xi),
        LadderScheme::ClosedForm => m.parallel_transport(x, y, xi),
    }
}

pub fn pole_ladder(m: &dyn Manifold, x: &[f64], y: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    Ok(PoleLadder::new(m, x, y, xi)?.zeta)
}

pub fn schild_ladder(m: &dyn Manifold, x: &[f64], y: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let e = m.exp(x, xi);
    let c = m.geodesic(y, &e, 0.5).map_err(|er| er.in_ladder_step(2))?;
    let p = m.geodesic(x, &c, 2.0).map_err(|er| er.in_ladder_step(3))?;
    m.log(y, &p).map_err(|er| er.in_ladder_step(4))
}

/// Gradients of `⟨w, P(x, y, ξ)⟩` with respect to the three ladder inputs.
///
/// `x` and `y` derivatives are covariant: `ξ` is held parallel when `x`
/// moves and the output is compared in the parallel frame at `y`.
#[derive(Clone, Debug)]
pub struct LadderGradients {
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderInput {
    XiPrev,
    XPoint,
    YPoint,
}

/// One pole-ladder evaluation with its intermediate points kept for the
/// adjoint chain.
#[derive(Clone, Debug)]
pub struct PoleLadder {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    pub c: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl PoleLadder {
    pub fn new(m: &dyn Manifold, x: &[f64], y: &[f64], xi: &[f64]) -> Result<Self> {
        let c = m.geodesic(x, y, 0.5).map_err(|er| er.in_ladder_step(1))?;
        let e = m.exp(x, xi);
        let p = m.geodesic(&e, &c, 2.0).map_err(|er| er.in_ladder_step(3))?;
        let zeta = scale(&m.log(y, &p).map_err(|er| er.in_ladder_step(4))?, -1.0);
        Ok(PoleLadder { x: x.to_vec(), y: y.to_vec(), xi: xi.to_vec(), c, e, p, zeta })
    }

    /// Pulls `w ∈ T_y` back through the ladder.
    pub fn adjoint(&self, m: &dyn Manifold, w: &[f64]) -> Result<LadderGradients> {
        let neg_w = scale(w, -1.0);
        // ζ = -log_y(p)
        let g_p = Differential::new(m, DiffKind::LogInArgument, &self.p, &self.y, 0.0)?.adjoint(&neg_w);
        let mut g_y = Differential::new(m, DiffKind::LogInBase, &self.y, &self.p, 0.0)?.adjoint(&neg_w);
        // p = γ(e, c; 2)
        let g_e = Differential::new(m, DiffKind::GeodesicInX, &self.e, &self.c, 2.0)?.adjoint(&g_p);
        let g_c = Differential::new(m, DiffKind::GeodesicInY, &self.c, &self.e, 2.0)?.adjoint(&g_p);
        // e = exp_x(ξ)
        let g_xi = Differential::new(m, DiffKind::ExpInTangent, &self.x, &self.xi, 0.0)?.adjoint(&g_e);
        let mut g_x = Differential::new(m, DiffKind::ExpInPoint, &self.x, &self.xi, 0.0)?.adjoint(&g_e);
        // c = γ(x, y; ½)
        let gx_c = Differential::new(m, DiffKind::GeodesicInX, &self.x, &self.y, 0.5)?.adjoint(&g_c);
        let gy_c = Differential::new(m, DiffKind::GeodesicInY, &self.y, &self.x, 0.5)?.adjoint(&g_c);
        axpy(&mut g_x, 1.0, &gx_c);
        axpy(&mut g_y, 1.0, &gy_c);
        Ok(LadderGradients { xi: g_xi, x: g_x, y: g_y })
    }
}

/// A single adjoint contribution of the pole ladder.
pub fn pole_ladder_differentials(
    m: &dyn Manifold,
    x: &[f64],
    y: &[f64],
    xi: &[f64],
    wrt: LadderInput,
    w: &[f64],
) -> Result<Vec<f64>> {
    let g = PoleLadder::new(m, x, y, xi)?.adjoint(m, w)?;
    Ok(match wrt {
        LadderInput::XiPrev => g.xi,
        LadderInput::XPoint => g.x,
        LadderInput::YPoint => g.y,
    })
}
