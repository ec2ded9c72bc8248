use std::f64::consts::PI;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::manifold::{JacobiFrame, LieGroup, Manifold};

/// The unit circle, stored as an angle in `[-π, π)`.
///
/// The group law is addition of angles modulo `2π`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Circle;

/// Wraps an angle to `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor();
    // Rounding can land exactly on π.
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

impl Manifold for Circle {
    fn name(&self) -> String {
        "s1".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn point_len(&self) -> usize {
        1
    }

    fn check_point(&self, x: &[f64], tol: f64) -> Result<()> {
        if x.len() != 1 {
            return Err(Error::ShapeMismatch(format!("s1 point has length {}", x.len())));
        }
        if !x[0].is_finite() || x[0] < -PI - tol || x[0] >= PI + tol {
            return Err(Error::Membership(format!("angle {} outside [-π, π)", x[0])));
        }
        Ok(())
    }

    fn check_tangent(&self, _x: &[f64], v: &[f64], _tol: f64) -> Result<()> {
        if v.len() != 1 || !v[0].is_finite() {
            return Err(Error::Membership("invalid s1 tangent".into()));
        }
        Ok(())
    }

    fn inner(&self, _x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        v[0] * w[0]
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        wrap_angle(y[0] - x[0]).abs()
    }

    fn exp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        vec![wrap_angle(x[0] + v[0])]
    }

    fn log(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let d = wrap_angle(y[0] - x[0]);
        if d.abs() > PI - 1e-12 {
            return Err(Error::CutLocus(format!("antipodal angles {} and {}", x[0], y[0])));
        }
        Ok(vec![d])
    }

    fn transport_along(&self, _x: &[f64], _v: &[f64], _t: f64, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }

    fn parallel_transport(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.log(x, y)?;
        Ok(w.to_vec())
    }

    fn frame_along(&self, _x: &[f64], v: &[f64]) -> JacobiFrame {
        JacobiFrame { basis: vec![vec![1.0]], kappa: vec![0.0], speed: v[0].abs() }
    }

    fn tangent_basis(&self, _x: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![1.0]]
    }

    fn project_tangent(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        vec![wrap_angle(x[0])]
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        vec![rng.random_range(-PI..PI)]
    }

    fn embedding_len(&self) -> usize {
        2
    }

    fn embed(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0].cos(), x[0].sin()]
    }

    fn project_embedded(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw[0] == 0.0 && raw[1] == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(vec![wrap_angle(raw[1].atan2(raw[0]))])
    }

    fn as_lie_group(&self) -> Option<&dyn LieGroup> {
        Some(self)
    }
}

impl LieGroup for Circle {
    fn identity(&self) -> Vec<f64> {
        vec![0.0]
    }
    fn compose(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        vec![wrap_angle(a[0] + b[0])]
    }
    fn inverse(&self, a: &[f64]) -> Vec<f64> {
        vec![wrap_angle(-a[0])]
    }
    fn left_translate_tangent(&self, _g: &[f64], _a: &[f64], v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn right_translate_tangent(&self, _g: &[f64], _a: &[f64], v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
    fn inverse_tangent(&self, _a: &[f64], v: &[f64]) -> Vec<f64> {
        vec![-v[0]]
    }
}
