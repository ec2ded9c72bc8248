//! Euclidean finite differences and energies for vector-valued images.
//!
//! These are the convex models the extrinsic solver works with, and the
//! reference the intrinsic models reduce to on flat data. Every variable is
//! a [`VecImage`] with the same number of values per pixel.

use crate::energies::{EnergyValue, ModelKind};
use crate::error::{Error, Result};
use crate::image::{Axis, ManifoldImage, PixelGrid};
use crate::linalg::axpy;

/// An image with `dim` real values per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct VecImage {
    grid: PixelGrid,
    dim: usize,
    data: Vec<f64>,
}

impl VecImage {
    pub fn new(grid: PixelGrid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() * dim {
            return Err(Error::ShapeMismatch(format!("{} values for {} pixels of dim {dim}", data.len(), grid.len())));
        }
        Ok(VecImage { grid, dim, data })
    }

    pub fn zeros(grid: PixelGrid, dim: usize) -> Self {
        VecImage { grid, dim, data: vec![0.0; grid.len() * dim] }
    }

    /// Raw point coordinates, e.g. angles for the circle.
    pub fn from_coords(img: &ManifoldImage) -> Self {
        VecImage { grid: img.grid(), dim: img.point_len(), data: img.data().to_vec() }
    }

    /// Extrinsic embedding of every pixel.
    pub fn embed(img: &ManifoldImage) -> Self {
        let m = img.manifold();
        let data = img.points().flat_map(|p| m.embed(p)).collect();
        VecImage { grid: img.grid(), dim: m.embedding_len(), data }
    }

    pub fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn pixel_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn axpy(&mut self, s: f64, other: &VecImage) {
        axpy(&mut self.data, s, &other.data);
    }

    pub fn dot(&self, other: &VecImage) -> f64 {
        crate::linalg::dot(&self.data, &other.data)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    fn check(&self, other: &VecImage) -> Result<()> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.grid.n1, self.grid.n2, self.dim, other.grid.n1, other.grid.n2, other.dim
            )));
        }
        Ok(())
    }
}

/// Axes that carry differences: only x for signals.
pub fn active_axes(grid: PixelGrid) -> &'static [Axis] {
    if grid.n2 == 1 {
        &Axis::BOTH[..1]
    } else {
        &Axis::BOTH
    }
}

/// A first-order difference operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diff {
    /// `u_{i+e} − u_i`, zero where `i+e` leaves the grid.
    Fwd(Axis),
    /// `u_i − u_{i−e}` where `i ± e` both lie in the grid, zero otherwise.
    Bwd(Axis),
}

impl Diff {
    /// Pairs `(plus, minus)` with `out_k = u_plus − u_minus`, or `None`.
    fn pair(self, grid: &PixelGrid, k: usize) -> Option<(usize, usize)> {
        match self {
            Diff::Fwd(a) => grid.step(k, a, 1).map(|j| (j, k)),
            Diff::Bwd(a) => grid.interior(k, a).then(|| (k, grid.step(k, a, -1).unwrap())),
        }
    }

    pub fn apply(self, u: &VecImage) -> VecImage {
        let mut out = VecImage::zeros(u.grid, u.dim);
        for k in 0..u.grid.len() {
            if let Some((p, m)) = self.pair(&u.grid, k) {
                for c in 0..u.dim {
                    out.data[k * u.dim + c] = u.data[p * u.dim + c] - u.data[m * u.dim + c];
                }
            }
        }
        out
    }

    pub fn adjoint(self, q: &VecImage) -> VecImage {
        let mut out = VecImage::zeros(q.grid, q.dim);
        for k in 0..q.grid.len() {
            if let Some((p, m)) = self.pair(&q.grid, k) {
                for c in 0..q.dim {
                    let v = q.data[k * q.dim + c];
                    out.data[p * q.dim + c] += v;
                    out.data[m * q.dim + c] -= v;
                }
            }
        }
        out
    }
}

/// `coef · ops(x[slot])`, with `ops[0]` applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub slot: usize,
    pub coef: f64,
    pub ops: Vec<Diff>,
}

impl Part {
    pub fn new(slot: usize, coef: f64, ops: &[Diff]) -> Self {
        Part { slot, coef, ops: ops.to_vec() }
    }

    fn apply(&self, x: &[VecImage]) -> VecImage {
        let mut y = x[self.slot].clone();
        for op in &self.ops {
            y = op.apply(&y);
        }
        for v in &mut y.data {
            *v *= self.coef;
        }
        y
    }

    fn adjoint_into(&self, q: &VecImage, s: f64, out: &mut [VecImage]) {
        let mut y = q.clone();
        for op in self.ops.iter().rev() {
            y = op.adjoint(&y);
        }
        out[self.slot].axpy(s * self.coef, &y);
    }
}

/// A mixed `(2,1)` norm `Σ_i sqrt(Σ_b |(K_b x)_i|² + (c ε)²)`, where every
/// block `K_b` is a sum of parts.
#[derive(Clone, Debug, PartialEq)]
pub struct NormTerm {
    pub weight: f64,
    /// Multiplies the smoothing parameter inside this term.
    pub eps_scale: f64,
    pub blocks: Vec<Vec<Part>>,
}

impl NormTerm {
    pub fn new(weight: f64, blocks: Vec<Vec<Part>>) -> Self {
        NormTerm { weight, eps_scale: 1.0, blocks }
    }

    /// `‖∇ x[slot]‖`.
    pub fn tv(grid: PixelGrid, slot: usize, weight: f64) -> Self {
        let blocks = active_axes(grid).iter().map(|&a| vec![Part::new(slot, 1.0, &[Diff::Fwd(a)])]).collect();
        NormTerm::new(weight, blocks)
    }

    /// `‖∇̃ ∇ x[slot]‖` with blocks `D_xx, D_yy, D_xy, D_yx`.
    pub fn tv2(grid: PixelGrid, slot: usize, weight: f64) -> Self {
        let axes = active_axes(grid);
        let mut blocks: Vec<Vec<Part>> =
            axes.iter().map(|&a| vec![Part::new(slot, 1.0, &[Diff::Fwd(a), Diff::Bwd(a)])]).collect();
        if axes.len() == 2 {
            blocks.push(vec![Part::new(slot, 1.0, &[Diff::Fwd(Axis::X), Diff::Bwd(Axis::Y)])]);
            blocks.push(vec![Part::new(slot, 1.0, &[Diff::Fwd(Axis::Y), Diff::Bwd(Axis::X)])]);
        }
        NormTerm::new(weight, blocks)
    }

    /// `‖∇ x[u] − ξ‖` with `ξ` in slots `xi, xi + 1, …`.
    pub fn tgv_first(grid: PixelGrid, u: usize, xi: usize, weight: f64) -> Self {
        let blocks = active_axes(grid)
            .iter()
            .enumerate()
            .map(|(c, &a)| vec![Part::new(u, 1.0, &[Diff::Fwd(a)]), Part::new(xi + c, -1.0, &[])])
            .collect();
        NormTerm::new(weight, blocks)
    }

    /// `‖∇̃ ξ‖`, or `‖∇̃_S ξ‖` when `symmetric`.
    pub fn tgv_second(grid: PixelGrid, xi: usize, weight: f64, symmetric: bool) -> Self {
        let axes = active_axes(grid);
        let blocks = if symmetric && axes.len() == 2 {
            let (x, y) = (Axis::X, Axis::Y);
            vec![
                vec![Part::new(xi, 1.0, &[Diff::Bwd(x)])],
                vec![Part::new(xi, 0.5, &[Diff::Bwd(y)]), Part::new(xi + 1, 0.5, &[Diff::Bwd(x)])],
                vec![Part::new(xi + 1, 1.0, &[Diff::Bwd(y)])],
            ]
        } else {
            let mut b = Vec::new();
            for c in 0..axes.len() {
                for &a in axes {
                    b.push(vec![Part::new(xi + c, 1.0, &[Diff::Bwd(a)])]);
                }
            }
            b
        };
        NormTerm::new(weight, blocks)
    }

    pub fn apply(&self, x: &[VecImage]) -> Vec<VecImage> {
        self.blocks
            .iter()
            .map(|parts| {
                let mut y = parts[0].apply(x);
                for p in &parts[1..] {
                    y.axpy(1.0, &p.apply(x));
                }
                y
            })
            .collect()
    }

    /// Adds `s · Kᵀ q` to `out`.
    pub fn adjoint_into(&self, q: &[VecImage], s: f64, out: &mut [VecImage]) {
        for (parts, qb) in self.blocks.iter().zip(q) {
            for p in parts {
                p.adjoint_into(qb, s, out);
            }
        }
    }

    /// Per-pixel squared norms of `K x`.
    pub fn pixel_sq(y: &[VecImage]) -> Vec<f64> {
        let n = y[0].grid.len();
        (0..n).map(|k| y.iter().map(|b| b.pixel(k).iter().map(|v| v * v).sum::<f64>()).sum()).collect()
    }

    /// Unweighted smoothed norm.
    pub fn value(&self, x: &[VecImage], eps: f64) -> f64 {
        let e2 = (self.eps_scale * eps).powi(2);
        NormTerm::pixel_sq(&self.apply(x)).iter().map(|s| (s + e2).sqrt()).sum()
    }

    /// Adds `s · grad` of the unweighted smoothed norm to `out`, returns the value.
    pub fn gradient_into(&self, x: &[VecImage], eps: f64, s: f64, out: &mut [VecImage]) -> f64 {
        let e2 = (self.eps_scale * eps).powi(2);
        let mut y = self.apply(x);
        let sq = NormTerm::pixel_sq(&y);
        let mut value = 0.0;
        for (k, sk) in sq.iter().enumerate() {
            let r = (sk + e2).sqrt();
            value += r;
            let f = if r > 0.0 { 1.0 / r } else { 0.0 };
            for b in &mut y {
                for v in b.pixel_mut(k) {
                    *v *= f;
                }
            }
        }
        self.adjoint_into(&y, s, out);
        value
    }
}

/// Linear data operator `A x = Σ coef · x[slot]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataOp {
    pub parts: Vec<(usize, f64)>,
}

impl DataOp {
    pub fn select(slot: usize) -> Self {
        DataOp { parts: vec![(slot, 1.0)] }
    }

    pub fn sum(a: usize, b: usize) -> Self {
        DataOp { parts: vec![(a, 1.0), (b, 1.0)] }
    }

    pub fn apply(&self, x: &[VecImage]) -> VecImage {
        let (s0, c0) = self.parts[0];
        let mut y = VecImage::zeros(x[s0].grid, x[s0].dim);
        y.axpy(c0, &x[s0]);
        for &(s, c) in &self.parts[1..] {
            y.axpy(c, &x[s]);
        }
        y
    }

    pub fn adjoint_into(&self, r: &VecImage, s: f64, out: &mut [VecImage]) {
        for &(slot, c) in &self.parts {
            out[slot].axpy(s * c, r);
        }
    }

    /// `A Aᵀ` is this multiple of the identity.
    pub fn gram(&self) -> f64 {
        self.parts.iter().map(|(_, c)| c * c).sum()
    }
}

/// `½ ‖A x − f‖² + α Σ_t w_t ‖K_t x‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct EuclidModel {
    pub slots: usize,
    pub data: DataOp,
    pub terms: Vec<NormTerm>,
}

impl EuclidModel {
    pub fn tv(grid: PixelGrid) -> Self {
        EuclidModel { slots: 1, data: DataOp::select(0), terms: vec![NormTerm::tv(grid, 0, 1.0)] }
    }

    pub fn additive(grid: PixelGrid, beta: f64) -> Self {
        EuclidModel {
            slots: 1,
            data: DataOp::select(0),
            terms: vec![NormTerm::tv(grid, 0, beta), NormTerm::tv2(grid, 0, 1.0 - beta)],
        }
    }

    /// Variables `(v, w)` with `u = v + w`.
    pub fn ic(grid: PixelGrid, beta: f64) -> Self {
        EuclidModel {
            slots: 2,
            data: DataOp::sum(0, 1),
            terms: vec![NormTerm::tv(grid, 0, beta), NormTerm::tv2(grid, 1, 1.0 - beta)],
        }
    }

    /// Variables `(u, ξ_1, …, ξ_s)`.
    pub fn tgv(grid: PixelGrid, beta: f64, symmetric: bool) -> Self {
        EuclidModel {
            slots: 1 + active_axes(grid).len(),
            data: DataOp::select(0),
            terms: vec![NormTerm::tgv_first(grid, 0, 1, beta), NormTerm::tgv_second(grid, 1, 1.0 - beta, symmetric)],
        }
    }

    /// Euclidean counterpart of a model kind.
    pub fn for_kind(kind: ModelKind, grid: PixelGrid, beta: f64, symmetric: bool) -> Result<Self> {
        Ok(match kind {
            ModelKind::Tv => EuclidModel::tv(grid),
            ModelKind::Additive | ModelKind::ExtAdditive => EuclidModel::additive(grid, beta),
            ModelKind::IcMidpoint | ModelKind::ExtIc => EuclidModel::ic(grid, beta),
            ModelKind::TgvPole | ModelKind::ExtTgv => EuclidModel::tgv(grid, beta, symmetric),
            k => return Err(Error::InvalidParameter(format!("{k} has no Euclidean counterpart"))),
        })
    }

    fn check(&self, x: &[VecImage], f: &VecImage) -> Result<()> {
        if x.len() != self.slots {
            return Err(Error::ShapeMismatch(format!("{} variables, model has {}", x.len(), self.slots)));
        }
        x.iter().try_for_each(|v| v.check(f))
    }

    /// Starting point `A x = f`: the data in the first data slot, zeros elsewhere.
    pub fn initial(&self, f: &VecImage) -> Vec<VecImage> {
        let mut x = vec![VecImage::zeros(f.grid, f.dim); self.slots];
        let (s, c) = self.data.parts[0];
        x[s].axpy(1.0 / c, f);
        x
    }

    pub fn reconstruction(&self, x: &[VecImage]) -> VecImage {
        self.data.apply(x)
    }

    pub fn energy(&self, x: &[VecImage], f: &VecImage, alpha: f64, eps: f64) -> Result<EnergyValue> {
        self.check(x, f)?;
        let mut r = self.data.apply(x);
        r.axpy(-1.0, f);
        let data_part = 0.5 * r.norm_sq();
        let prior_part: f64 = self.terms.iter().map(|t| t.weight * t.value(x, eps)).sum();
        Ok(EnergyValue { total: data_part + alpha * prior_part, data_part, prior_part })
    }

    /// Energy and gradient; needs `eps > 0` wherever a norm vanishes.
    pub fn energy_and_gradient(&self, x: &[VecImage], f: &VecImage, alpha: f64, eps: f64) -> Result<(f64, Vec<VecImage>)> {
        self.check(x, f)?;
        let mut g = vec![VecImage::zeros(f.grid, f.dim); self.slots];
        let mut r = self.data.apply(x);
        r.axpy(-1.0, f);
        let mut total = 0.5 * r.norm_sq();
        self.data.adjoint_into(&r, 1.0, &mut g);
        for t in &self.terms {
            if t.weight != 0.0 && alpha != 0.0 {
                total += alpha * t.weight * t.gradient_into(x, eps, alpha * t.weight, &mut g);
            }
        }
        Ok((total, g))
    }

    /// All blocks of all terms applied to `x`.
    pub fn apply_k(&self, x: &[VecImage]) -> Vec<Vec<VecImage>> {
        self.terms.iter().map(|t| t.apply(x)).collect()
    }

    pub fn adjoint_k(&self, y: &[Vec<VecImage>], out: &mut [VecImage]) {
        for (t, yt) in self.terms.iter().zip(y) {
            t.adjoint_into(yt, 1.0, out);
        }
    }

    /// Upper estimate of `‖K‖` by power iteration on `KᵀK`.
    pub fn k_norm(&self, grid: PixelGrid, dim: usize) -> f64 {
        let mut x: Vec<VecImage> = (0..self.slots)
            .map(|s| {
                let data = (0..grid.len() * dim).map(|i| (((i * 7919 + s * 104729) % 1009) as f64 / 1009.0) - 0.5).collect();
                VecImage { grid, dim, data }
            })
            .collect();
        let mut lambda: f64 = 0.0;
        for _ in 0..60 {
            let n = x.iter().map(|v| v.norm_sq()).sum::<f64>().sqrt();
            if n == 0.0 {
                return 0.0;
            }
            for v in &mut x {
                for c in &mut v.data {
                    *c /= n;
                }
            }
            let mut y = vec![VecImage::zeros(grid, dim); self.slots];
            self.adjoint_k(&self.apply_k(&x), &mut y);
            lambda = y.iter().map(|v| v.norm_sq()).sum::<f64>().sqrt();
            x = y;
        }
        1.05 * lambda.sqrt()
    }
}
