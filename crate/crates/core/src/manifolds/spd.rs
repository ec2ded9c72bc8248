use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::manifold::{JacobiFrame, Manifold};

/// Eigenvalue floor inside the matrix logarithm.
const LOG_FLOOR: f64 = 1e-14;

/// Eigenvalue shift used when projecting onto the closed cone from outside.
pub const PROJECTION_SHIFT: f64 = 1e-10;

/// Symmetric positive definite `r × r` matrices with the affine invariant
/// metric `⟨v, w⟩_x = tr(v x⁻¹ w x⁻¹)`.
///
/// Points and tangents (symmetric matrices) are stored as the upper triangle
/// in row-major order, `r(r+1)/2` values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spd {
    r: usize,
}

/// Eigendecomposition `Q diag(λ) Qᵀ` of a symmetric matrix.
struct Eig {
    q: DMatrix<f64>,
    l: DVector<f64>,
}

impl Eig {
    fn new(a: DMatrix<f64>) -> Self {
        let e = SymmetricEigen::new(a);
        Eig { q: e.eigenvectors, l: e.eigenvalues }
    }

    fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let fl = DVector::from_iterator(self.l.len(), self.l.iter().map(|&x| f(x)));
        &self.q * DMatrix::from_diagonal(&fl) * self.q.transpose()
    }
}

/// Square root and inverse square root of a point.
struct Roots {
    half: DMatrix<f64>,
    inv_half: DMatrix<f64>,
}

impl Roots {
    fn new(x: &DMatrix<f64>) -> Self {
        let e = Eig::new(x.clone());
        Roots { half: e.apply(f64::sqrt), inv_half: e.apply(|l| 1.0 / l.sqrt()) }
    }

    fn whiten(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        sym(&(&self.inv_half * v * &self.inv_half))
    }

    fn color(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        sym(&(&self.half * v * &self.half))
    }
}

fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

impl Spd {
    pub fn new(r: usize) -> Self {
        assert!(r >= 1, "matrix size must be positive");
        Spd { r }
    }

    pub fn size(&self) -> usize {
        self.r
    }

    /// Symmetric matrix from upper-triangular storage.
    pub fn to_matrix(&self, v: &[f64]) -> DMatrix<f64> {
        let r = self.r;
        let mut m = DMatrix::zeros(r, r);
        let mut k = 0;
        for i in 0..r {
            for j in i..r {
                m[(i, j)] = v[k];
                m[(j, i)] = v[k];
                k += 1;
            }
        }
        m
    }

    /// Upper-triangular storage of the symmetric part of `m`.
    pub fn from_matrix(&self, m: &DMatrix<f64>) -> Vec<f64> {
        let r = self.r;
        let mut out = Vec::with_capacity(r * (r + 1) / 2);
        for i in 0..r {
            for j in i..r {
                out.push(0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    /// Standard basis of symmetric matrices, orthonormal in Frobenius norm.
    fn sym_basis(&self) -> Vec<DMatrix<f64>> {
        let r = self.r;
        let mut out = Vec::new();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..r {
            for j in i..r {
                let mut b = DMatrix::zeros(r, r);
                if i == j {
                    b[(i, i)] = 1.0;
                } else {
                    b[(i, j)] = s;
                    b[(j, i)] = s;
                }
                out.push(b);
            }
        }
        out
    }

    pub fn eigenvalues(&self, x: &[f64]) -> Vec<f64> {
        Eig::new(self.to_matrix(x)).l.iter().copied().collect()
    }
}

impl Manifold for Spd {
    fn name(&self) -> String {
        format!("spd{}", self.r)
    }
    fn dim(&self) -> usize {
        self.r * (self.r + 1) / 2
    }
    fn point_len(&self) -> usize {
        self.r * (self.r + 1) / 2
    }

    fn check_point(&self, x: &[f64], _tol: f64) -> Result<()> {
        if x.len() != self.point_len() {
            return Err(Error::ShapeMismatch(format!("expected {} coordinates, got {}", self.point_len(), x.len())));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::Membership("non-finite coordinate".into()));
        }
        let lmin = self.eigenvalues(x).into_iter().fold(f64::INFINITY, f64::min);
        if lmin <= 0.0 {
            return Err(Error::Membership(format!("smallest eigenvalue {lmin:e} is not positive")));
        }
        Ok(())
    }

    fn check_tangent(&self, _x: &[f64], v: &[f64], _tol: f64) -> Result<()> {
        if v.len() != self.point_len() || v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Membership("invalid symmetric tangent".into()));
        }
        Ok(())
    }

    fn inner(&self, x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let xm = self.to_matrix(x);
        let xi = xm.try_inverse().unwrap_or_else(|| DMatrix::from_element(self.r, self.r, f64::NAN));
        let a = self.to_matrix(v) * &xi;
        let b = self.to_matrix(w) * &xi;
        (a * b).trace()
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        if x == y {
            return 0.0;
        }
        let roots = Roots::new(&self.to_matrix(x));
        let w = roots.whiten(&self.to_matrix(y));
        Eig::new(w).l.iter().map(|l| l.max(LOG_FLOOR).ln().powi(2)).sum::<f64>().sqrt()
    }

    fn exp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        if v.iter().all(|&c| c == 0.0) {
            return x.to_vec();
        }
        let roots = Roots::new(&self.to_matrix(x));
        let e = Eig::new(roots.whiten(&self.to_matrix(v))).apply(f64::exp);
        self.from_matrix(&roots.color(&e))
    }

    fn log(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if x == y {
            return Ok(vec![0.0; x.len()]);
        }
        let roots = Roots::new(&self.to_matrix(x));
        let l = Eig::new(roots.whiten(&self.to_matrix(y))).apply(|l| l.max(LOG_FLOOR).ln());
        Ok(self.from_matrix(&roots.color(&l)))
    }

    fn transport_along(&self, x: &[f64], v: &[f64], t: f64, w: &[f64]) -> Vec<f64> {
        let roots = Roots::new(&self.to_matrix(x));
        let vh = roots.whiten(&self.to_matrix(v));
        let half = Eig::new(vh).apply(|l| (0.5 * t * l).exp());
        let e = &roots.half * half * &roots.inv_half;
        self.from_matrix(&(&e * self.to_matrix(w) * e.transpose()))
    }

    fn parallel_transport(&self, x: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let m = self.to_matrix(&self.geodesic(x, y, 0.5)?);
        let xi = self
            .to_matrix(x)
            .try_inverse()
            .ok_or_else(|| Error::Membership("singular matrix".into()))?;
        let e = &m * &xi;
        Ok(self.from_matrix(&(&e * self.to_matrix(w) * e.transpose())))
    }

    fn frame_along(&self, x: &[f64], v: &[f64]) -> JacobiFrame {
        let r = self.r;
        let roots = Roots::new(&self.to_matrix(x));
        let vh = roots.whiten(&self.to_matrix(v));
        let speed = vh.norm();
        let e = Eig::new(vh);
        let mut basis = Vec::new();
        let mut kappa = Vec::new();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..r {
            for j in i..r {
                let qi = e.q.column(i);
                let qj = e.q.column(j);
                let b = if i == j { qi * qi.transpose() } else { (qi * qj.transpose() + qj * qi.transpose()) * s };
                basis.push(self.from_matrix(&roots.color(&b)));
                kappa.push(-0.25 * (e.l[i] - e.l[j]).powi(2));
            }
        }
        JacobiFrame { basis, kappa, speed }
    }

    fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let roots = Roots::new(&self.to_matrix(x));
        self.sym_basis().iter().map(|b| self.from_matrix(&roots.color(b))).collect()
    }

    fn project_tangent(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let r = self.r;
        let mut a = DMatrix::zeros(r, r);
        for i in 0..r {
            for j in i..r {
                let g: f64 = StandardNormal.sample(&mut *rng);
                a[(i, j)] = 0.5 * g;
                a[(j, i)] = 0.5 * g;
            }
        }
        self.from_matrix(&Eig::new(a).apply(f64::exp))
    }

    fn project_embedded(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.iter().any(|c| !c.is_finite()) {
            return Err(Error::Membership("non-finite coordinate".into()));
        }
        let e = Eig::new(self.to_matrix(raw));
        Ok(self.from_matrix(&e.apply(|l| l.max(PROJECTION_SHIFT))))
    }
}
