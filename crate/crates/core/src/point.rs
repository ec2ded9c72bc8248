//! Checked point and tangent-vector wrappers.
//!
//! The numerical kernels work on raw slices; this layer validates membership,
//! ownership by the same manifold and tangent bases for callers who want it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::scale;
use crate::manifold::{self, DiffKind, JacobiFrame, Manifold, MEMBERSHIP_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint {
    manifold: String,
    coords: Vec<f64>,
}

impl ManifoldPoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
    pub fn manifold_id(&self) -> &str {
        &self.manifold
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    vec: Vec<f64>,
}

impl TangentVector {
    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }
    pub fn vec(&self) -> &[f64] {
        &self.vec
    }
}

/// Second argument of a differential: a fixed point or the tangent of an exp map.
#[derive(Clone, Copy, Debug)]
pub enum DiffArg<'a> {
    Point(&'a ManifoldPoint),
    Tangent(&'a TangentVector),
}

/// A manifold handle that hands out and consumes checked values.
#[derive(Clone, Debug)]
pub struct Space {
    m: Arc<dyn Manifold>,
    id: String,
}

impl Space {
    pub fn new(m: Arc<dyn Manifold>) -> Self {
        let id = m.name();
        Space { m, id }
    }

    pub fn manifold(&self) -> &dyn Manifold {
        self.m.as_ref()
    }

    fn own(&self, p: &ManifoldPoint) -> Result<()> {
        if p.manifold != self.id {
            return Err(Error::ManifoldMismatch { expected: self.id.clone(), found: p.manifold.clone() });
        }
        Ok(())
    }

    fn wrap(&self, coords: Vec<f64>) -> ManifoldPoint {
        ManifoldPoint { manifold: self.id.clone(), coords }
    }

    fn at(&self, base: &ManifoldPoint, vec: Vec<f64>) -> TangentVector {
        TangentVector { base: base.clone(), vec }
    }

    pub fn point(&self, coords: &[f64]) -> Result<ManifoldPoint> {
        self.m.check_point(coords, MEMBERSHIP_TOL)?;
        Ok(self.wrap(self.m.normalize(coords)))
    }

    pub fn tangent(&self, base: &ManifoldPoint, vec: &[f64]) -> Result<TangentVector> {
        self.own(base)?;
        self.m.check_tangent(&base.coords, vec, MEMBERSHIP_TOL)?;
        Ok(self.at(base, vec.to_vec()))
    }

    pub fn zero(&self, base: &ManifoldPoint) -> TangentVector {
        self.at(base, vec![0.0; self.m.point_len()])
    }

    pub fn dist(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        self.own(x)?;
        self.own(y)?;
        Ok(self.m.dist(&x.coords, &y.coords))
    }

    pub fn exp(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        self.own(x)?;
        if v.base != *x {
            return Err(Error::BaseMismatch);
        }
        Ok(self.wrap(self.m.exp(&x.coords, &v.vec)))
    }

    pub fn log(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
        self.own(x)?;
        self.own(y)?;
        Ok(self.at(x, self.m.log(&x.coords, &y.coords)?))
    }

    pub fn geodesic(&self, x: &ManifoldPoint, y: &ManifoldPoint, t: f64) -> Result<ManifoldPoint> {
        self.own(x)?;
        self.own(y)?;
        Ok(self.wrap(self.m.geodesic(&x.coords, &y.coords, t)?))
    }

    pub fn inner(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        self.own(&v.base)?;
        if v.base != w.base {
            return Err(Error::BaseMismatch);
        }
        Ok(self.m.inner(&v.base.coords, &v.vec, &w.vec))
    }

    pub fn scale(&self, v: &TangentVector, s: f64) -> TangentVector {
        self.at(&v.base, scale(&v.vec, s))
    }

    pub fn jacobi_frame(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<JacobiFrame> {
        self.own(x)?;
        self.own(y)?;
        manifold::jacobi_frame(self.m.as_ref(), &x.coords, &y.coords)
    }

    pub fn parallel_transport(&self, v: &TangentVector, y: &ManifoldPoint) -> Result<TangentVector> {
        self.own(&v.base)?;
        self.own(y)?;
        Ok(self.at(y, self.m.parallel_transport(&v.base.coords, &y.coords, &v.vec)?))
    }

    pub fn project(&self, raw: &[f64]) -> Result<ManifoldPoint> {
        Ok(self.wrap(self.m.project_embedded(raw)?))
    }

    fn diff_setup<'a>(&'a self, kind: DiffKind, x: &ManifoldPoint, arg: DiffArg<'a>, tau: f64) -> Result<manifold::Differential<'a>> {
        self.own(x)?;
        let raw: &[f64] = match (kind, arg) {
            (DiffKind::ExpInPoint | DiffKind::ExpInTangent, DiffArg::Tangent(t)) => {
                if t.base != *x {
                    return Err(Error::BaseMismatch);
                }
                &t.vec
            }
            (DiffKind::ExpInPoint | DiffKind::ExpInTangent, DiffArg::Point(_)) => {
                return Err(Error::InvalidParameter("exp differentials take a tangent argument".into()))
            }
            (_, DiffArg::Point(y)) => {
                self.own(y)?;
                &y.coords
            }
            (_, DiffArg::Tangent(_)) => {
                return Err(Error::InvalidParameter("geodesic and log differentials take a point argument".into()))
            }
        };
        manifold::Differential::new(self.m.as_ref(), kind, &x.coords, raw, tau)
    }

    /// `DF(x)[input]`, based at `F(x)`.
    pub fn diff_map(&self, kind: DiffKind, x: &ManifoldPoint, arg: DiffArg<'_>, tau: f64, input: &TangentVector) -> Result<TangentVector> {
        if input.base != *x {
            return Err(Error::BaseMismatch);
        }
        let d = self.diff_setup(kind, x, arg, tau)?;
        let out_base = match (kind, arg) {
            (DiffKind::LogInBase, _) => x.clone(),
            (DiffKind::LogInArgument, DiffArg::Point(y)) => y.clone(),
            _ => self.wrap(d.end_point().to_vec()),
        };
        Ok(self.at(&out_base, d.apply(&input.vec)))
    }

    /// `DF(x)*[w]`, based at `x`.
    pub fn adjoint_diff_map(&self, kind: DiffKind, x: &ManifoldPoint, arg: DiffArg<'_>, tau: f64, w: &TangentVector) -> Result<TangentVector> {
        let d = self.diff_setup(kind, x, arg, tau)?;
        Ok(self.at(x, d.adjoint(&w.vec)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Circle, Sphere};

    #[test]
    fn rejects_foreign_points() {
        let s2 = Space::new(Arc::new(Sphere::new(2)));
        let s1 = Space::new(Arc::new(Circle));
        let p = s1.point(&[0.3]).unwrap();
        let q = s2.point(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(s2.dist(&p, &q), Err(Error::ManifoldMismatch { .. })));
    }

    #[test]
    fn rejects_off_manifold_and_wrong_base() {
        let s2 = Space::new(Arc::new(Sphere::new(2)));
        assert!(s2.point(&[0.0, 0.0, 1.1]).is_err());
        let x = s2.point(&[0.0, 0.0, 1.0]).unwrap();
        let y = s2.point(&[1.0, 0.0, 0.0]).unwrap();
        assert!(s2.tangent(&x, &[0.0, 0.0, 1.0]).is_err());
        let v = s2.tangent(&y, &[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(s2.exp(&x, &v), Err(Error::BaseMismatch)));
        let w = s2.log(&x, &y).unwrap();
        assert!((w.vec()[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn typed_differential_bases() {
        let s2 = Space::new(Arc::new(Sphere::new(2)));
        let x = s2.point(&[0.0, 0.0, 1.0]).unwrap();
        let y = s2.point(&[0.6, 0.0, 0.8]).unwrap();
        let v = s2.tangent(&x, &[0.0, 0.2, 0.0]).unwrap();
        let d = s2.diff_map(DiffKind::LogInArgument, &x, DiffArg::Point(&y), 0.0, &v).unwrap();
        assert_eq!(d.base(), &y);
        let back = s2.adjoint_diff_map(DiffKind::LogInArgument, &x, DiffArg::Point(&y), 0.0, &d).unwrap();
        assert_eq!(back.base(), &x);
    }
}
