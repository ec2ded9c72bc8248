use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, orthonormal_complement, scale};
use crate::manifold::{JacobiFrame, LieGroup, Manifold};
use crate::manifolds::sphere::{
    check_unit, sphere_dist, sphere_exp, sphere_frame, sphere_log, sphere_project_tangent, sphere_random,
    sphere_transport, sphere_transport_along, unit,
};

/// Rotations `SO(3)` as unit quaternions `(w, x, y, z)` modulo sign.
///
/// The metric is twice the round metric of `S³`, so the distance between
/// rotations `p`, `q` is `√2 · arccos |⟨p, q⟩|`. Stored representatives have
/// a nonnegative first component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rotations;

const METRIC: f64 = 2.0;

/// Sign that moves `q` to the canonical half of `S³`.
fn canonical_sign(q: &[f64]) -> f64 {
    for &c in q {
        if c > 0.0 {
            return 1.0;
        }
        if c < 0.0 {
            return -1.0;
        }
    }
    1.0
}

pub fn canonicalize(q: &[f64]) -> Vec<f64> {
    scale(q, canonical_sign(q))
}

/// Hamilton product.
pub fn quat_mul(a: &[f64], b: &[f64]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn quat_conj(a: &[f64]) -> Vec<f64> {
    vec![a[0], -a[1], -a[2], -a[3]]
}

/// Unit quaternion of the rotation by `angle` about `axis`.
pub fn axis_angle(axis: [f64; 3], angle: f64) -> Vec<f64> {
    let n = norm(&axis);
    let s = (angle / 2.0).sin() / n;
    canonicalize(&[(angle / 2.0).cos(), axis[0] * s, axis[1] * s, axis[2] * s])
}

/// Rotation matrix (row-major) of a unit quaternion.
pub fn rotation_matrix(q: &[f64]) -> [[f64; 3]; 3] {
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

impl Rotations {
    /// Representative of `y` closest to `x`.
    fn aligned(x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
        let s = if dot(x, y) < 0.0 { -1.0 } else { 1.0 };
        (scale(y, s), s)
    }
}

impl Manifold for Rotations {
    fn name(&self) -> String {
        "so3".into()
    }
    fn dim(&self) -> usize {
        3
    }
    fn point_len(&self) -> usize {
        4
    }

    fn check_point(&self, x: &[f64], tol: f64) -> Result<()> {
        check_unit(x, 4, tol)?;
        if canonical_sign(x) < 0.0 && x[0] < -tol {
            return Err(Error::Membership("quaternion not in canonical half-space".into()));
        }
        Ok(())
    }

    fn check_tangent(&self, x: &[f64], v: &[f64], tol: f64) -> Result<()> {
        if v.len() != 4 {
            return Err(Error::ShapeMismatch("tangent length".into()));
        }
        let c = dot(x, v).abs();
        if c > tol * (1.0 + norm(v)) {
            return Err(Error::Membership(format!("tangent not orthogonal to base ({c:e})")));
        }
        Ok(())
    }

    fn inner(&self, _x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        METRIC * dot(v, w)
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        let (y, _) = Self::aligned(x, y);
        METRIC.sqrt() * sphere_dist(x, &y)
    }

    fn exp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        canonicalize(&sphere_exp(x, v))
    }

    fn log(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let (y, _) = Self::aligned(x, y);
        // Rotation angle π corresponds to orthogonal quaternions.
        if dot(x, &y).abs() < 5e-13 {
            return Err(Error::CutLocus("rotation angle π".into()));
        }
        sphere_log(x, &y)
    }

    fn transport_along(&self, x: &[f64], v: &[f64], t: f64, w: &[f64]) -> Vec<f64> {
        let end = sphere_exp(x, &scale(v, t));
        scale(&sphere_transport_along(x, v, t, w), canonical_sign(&end))
    }

    fn parallel_transport(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.log(x, y)?;
        let (ya, s) = Self::aligned(x, y);
        Ok(scale(&sphere_transport(x, &ya, w)?, s))
    }

    fn frame_along(&self, x: &[f64], v: &[f64]) -> JacobiFrame {
        let mut f = sphere_frame(x, v);
        let r = 1.0 / METRIC.sqrt();
        for b in &mut f.basis {
            *b = scale(b, r);
        }
        f.speed *= METRIC.sqrt();
        f
    }

    fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let r = 1.0 / METRIC.sqrt();
        orthonormal_complement(&[x.to_vec()], 4).into_iter().map(|b| scale(&b, r)).collect()
    }

    fn project_tangent(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        sphere_project_tangent(x, v)
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        unit(x).map(|u| canonicalize(&u)).unwrap_or_else(|_| x.to_vec())
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        canonicalize(&sphere_random(4, rng))
    }

    fn project_embedded(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Ok(canonicalize(&unit(raw)?))
    }

    fn as_lie_group(&self) -> Option<&dyn LieGroup> {
        Some(self)
    }
}

impl LieGroup for Rotations {
    fn identity(&self) -> Vec<f64> {
        vec![1.0, 0.0, 0.0, 0.0]
    }

    fn compose(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let p = quat_mul(a, b);
        // Products of unit quaternions drift slowly; renormalize.
        canonicalize(&unit(&p).unwrap_or_else(|_| p.to_vec()))
    }

    fn inverse(&self, a: &[f64]) -> Vec<f64> {
        quat_conj(a)
    }

    fn left_translate_tangent(&self, g: &[f64], a: &[f64], v: &[f64]) -> Vec<f64> {
        let s = canonical_sign(&quat_mul(g, a));
        scale(&quat_mul(g, v), s)
    }

    fn right_translate_tangent(&self, g: &[f64], a: &[f64], v: &[f64]) -> Vec<f64> {
        let s = canonical_sign(&quat_mul(a, g));
        scale(&quat_mul(v, g), s)
    }

    fn inverse_tangent(&self, _a: &[f64], v: &[f64]) -> Vec<f64> {
        quat_conj(v)
    }
}
