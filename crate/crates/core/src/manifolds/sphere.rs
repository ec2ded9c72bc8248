use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, orthonormal_complement, scale, sub};
use crate::manifold::{JacobiFrame, Manifold};

/// The unit sphere `S^d` embedded in `R^{d+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sphere {
    d: usize,
}

impl Sphere {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "sphere dimension must be positive");
        Sphere { d }
    }
}

// Raw unit-sphere maps shared with the quaternion model of SO(3).

pub(crate) fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(scale(v, 1.0 / n))
}

pub(crate) fn sphere_dist(x: &[f64], y: &[f64]) -> f64 {
    // Chord-based formula, accurate for both near and far points.
    let chord = norm(&sub(x, y));
    let a = crate::linalg::add(x, y);
    2.0 * chord.atan2(norm(&a))
}

pub(crate) fn sphere_exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n < 1e-300 {
        return x.to_vec();
    }
    let mut y = scale(x, n.cos());
    axpy(&mut y, n.sin() / n, v);
    let ny = norm(&y);
    scale(&y, 1.0 / ny)
}

/// Component of `y - x` orthogonal to `x`, computed without cancellation.
fn sphere_log_direction(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut w = sub(y, x);
    let c = dot(&w, x);
    axpy(&mut w, -c, x);
    w
}

pub(crate) fn sphere_log(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let s = norm(&crate::linalg::add(x, y));
    if s <= 1e-12 {
        return Err(Error::CutLocus("antipodal points on the sphere".into()));
    }
    let w = sphere_log_direction(x, y);
    let n = norm(&w);
    if n < 1e-300 {
        return Ok(vec![0.0; x.len()]);
    }
    let d = sphere_dist(x, y);
    Ok(scale(&w, d / n))
}

pub(crate) fn sphere_transport_along(x: &[f64], v: &[f64], t: f64, w: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n < 1e-300 {
        return w.to_vec();
    }
    let u = scale(v, 1.0 / n);
    let th = t * n;
    let a = dot(w, &u);
    let mut out = w.to_vec();
    axpy(&mut out, a * (th.cos() - 1.0), &u);
    axpy(&mut out, -a * th.sin(), x);
    out
}

pub(crate) fn sphere_transport(x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let lxy = sphere_log(x, y)?;
    let d2 = dot(&lxy, &lxy);
    if d2 < 1e-300 {
        return Ok(w.to_vec());
    }
    let lyx = sphere_log(y, x)?;
    let c = dot(&lxy, w) / d2;
    let mut out = w.to_vec();
    axpy(&mut out, -c, &lxy);
    axpy(&mut out, -c, &lyx);
    Ok(out)
}

pub(crate) fn sphere_frame(x: &[f64], v: &[f64]) -> JacobiFrame {
    let n = norm(v);
    if n < 1e-300 {
        let basis = orthonormal_complement(&[x.to_vec()], x.len());
        let k = basis.len();
        return JacobiFrame { basis, kappa: vec![0.0; k], speed: 0.0 };
    }
    let e1 = scale(v, 1.0 / n);
    let rest = orthonormal_complement(&[x.to_vec(), e1.clone()], x.len());
    let mut basis = vec![e1];
    let mut kappa = vec![0.0];
    for b in rest {
        basis.push(b);
        kappa.push(n * n);
    }
    JacobiFrame { basis, kappa, speed: n }
}

pub(crate) fn sphere_project_tangent(x: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    axpy(&mut out, -dot(v, x), x);
    out
}

pub(crate) fn sphere_random(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect();
        if let Ok(u) = unit(&v) {
            return u;
        }
    }
}

pub(crate) fn check_unit(x: &[f64], len: usize, tol: f64) -> Result<()> {
    if x.len() != len {
        return Err(Error::ShapeMismatch(format!("expected {} coordinates, got {}", len, x.len())));
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::Membership("non-finite coordinate".into()));
    }
    let drift = (norm(x) - 1.0).abs();
    if drift > tol {
        return Err(Error::Membership(format!("norm deviates from 1 by {drift:e}")));
    }
    Ok(())
}

impl Manifold for Sphere {
    fn name(&self) -> String {
        format!("s{}", self.d)
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn point_len(&self) -> usize {
        self.d + 1
    }

    fn check_point(&self, x: &[f64], tol: f64) -> Result<()> {
        check_unit(x, self.d + 1, tol)
    }

    fn check_tangent(&self, x: &[f64], v: &[f64], tol: f64) -> Result<()> {
        if v.len() != self.d + 1 {
            return Err(Error::ShapeMismatch("tangent length".into()));
        }
        let c = dot(x, v).abs();
        if c > tol * (1.0 + norm(v)) {
            return Err(Error::Membership(format!("tangent not orthogonal to base ({c:e})")));
        }
        Ok(())
    }

    fn inner(&self, _x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        dot(v, w)
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        sphere_dist(x, y)
    }

    fn exp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        sphere_exp(x, v)
    }

    fn log(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        sphere_log(x, y)
    }

    fn transport_along(&self, x: &[f64], v: &[f64], t: f64, w: &[f64]) -> Vec<f64> {
        sphere_transport_along(x, v, t, w)
    }

    fn parallel_transport(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        sphere_transport(x, y, w)
    }

    fn frame_along(&self, x: &[f64], v: &[f64]) -> JacobiFrame {
        sphere_frame(x, v)
    }

    fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        orthonormal_complement(&[x.to_vec()], x.len())
    }

    fn project_tangent(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        sphere_project_tangent(x, v)
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        unit(x).unwrap_or_else(|_| x.to_vec())
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        sphere_random(self.d + 1, rng)
    }

    fn project_embedded(&self, raw: &[f64]) -> Result<Vec<f64>> {
        unit(raw)
    }
}
