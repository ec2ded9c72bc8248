//! Pixel grids, manifold-valued images and tangent fields.
//!
//! Pixels are linearized column-major: index `i1 + n1 * i2`, where `i1` runs
//! along the x direction.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, MEMBERSHIP_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelGrid {
    pub n1: usize,
    pub n2: usize,
}

impl PixelGrid {
    pub fn new(n1: usize, n2: usize) -> Self {
        assert!(n1 > 0 && n2 > 0, "grid must be nonempty");
        PixelGrid { n1, n2 }
    }

    /// A signal of length `n`, laid out along x.
    pub fn signal(n: usize) -> Self {
        PixelGrid::new(n, 1)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 + self.n1 * i2
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.n1, k / self.n1)
    }

    /// Pixel `k + (d1, d2)` if it lies in the grid.
    pub fn offset(&self, k: usize, d1: isize, d2: isize) -> Option<usize> {
        let (i1, i2) = self.coords(k);
        let j1 = i1 as isize + d1;
        let j2 = i2 as isize + d2;
        if j1 < 0 || j2 < 0 || j1 >= self.n1 as isize || j2 >= self.n2 as isize {
            None
        } else {
            Some(self.index(j1 as usize, j2 as usize))
        }
    }

    /// Neighbor `k + s·e_axis`.
    pub fn step(&self, k: usize, axis: Axis, s: isize) -> Option<usize> {
        match axis {
            Axis::X => self.offset(k, s, 0),
            Axis::Y => self.offset(k, 0, s),
        }
    }

    /// Both `k ± e_axis` exist.
    pub fn interior(&self, k: usize, axis: Axis) -> bool {
        self.step(k, axis, -1).is_some() && self.step(k, axis, 1).is_some()
    }
}

/// An image with values on a manifold.
#[derive(Clone)]
pub struct ManifoldImage {
    grid: PixelGrid,
    manifold: Arc<dyn Manifold>,
    data: Vec<f64>,
}

impl fmt::Debug for ManifoldImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManifoldImage")
            .field("manifold", &self.manifold.name())
            .field("grid", &self.grid)
            .finish()
    }
}

impl ManifoldImage {
    /// Checks every pixel for membership and removes representation drift.
    pub fn new(grid: PixelGrid, manifold: Arc<dyn Manifold>, data: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(grid, manifold, data, MEMBERSHIP_TOL)
    }

    pub fn with_tolerance(grid: PixelGrid, manifold: Arc<dyn Manifold>, mut data: Vec<f64>, tol: f64) -> Result<Self> {
        let len = manifold.point_len();
        if data.len() != grid.len() * len {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} pixels of length {}",
                data.len(),
                grid.len(),
                len
            )));
        }
        for (k, p) in data.chunks_mut(len).enumerate() {
            manifold.check_point(p, tol).map_err(|e| e.at_pixel(k))?;
            let q = manifold.normalize(p);
            p.copy_from_slice(&q);
        }
        Ok(ManifoldImage { grid, manifold, data })
    }

    /// Builds an image from points produced by trusted manifold maps.
    pub(crate) fn from_raw(grid: PixelGrid, manifold: Arc<dyn Manifold>, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len() * manifold.point_len());
        ManifoldImage { grid, manifold, data }
    }

    pub fn from_points(grid: PixelGrid, manifold: Arc<dyn Manifold>, points: &[Vec<f64>]) -> Result<Self> {
        let data = points.iter().flat_map(|p| p.iter().copied()).collect();
        Self::new(grid, manifold, data)
    }

    pub fn constant(grid: PixelGrid, manifold: Arc<dyn Manifold>, p: &[f64]) -> Result<Self> {
        let data = (0..grid.len()).flat_map(|_| p.iter().copied()).collect();
        Self::new(grid, manifold, data)
    }

    pub fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub fn manifold(&self) -> &dyn Manifold {
        self.manifold.as_ref()
    }

    pub fn manifold_arc(&self) -> Arc<dyn Manifold> {
        self.manifold.clone()
    }

    pub fn point_len(&self) -> usize {
        self.manifold.point_len()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> &[f64] {
        let l = self.point_len();
        &self.data[k * l..(k + 1) * l]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.point_len())
    }

    /// Same grid and manifold.
    pub fn check_compatible(&self, other: &ManifoldImage) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch(format!("grids {:?} and {:?}", self.grid, other.grid)));
        }
        if self.manifold.name() != other.manifold.name() {
            return Err(Error::ManifoldMismatch { expected: self.manifold.name(), found: other.manifold.name() });
        }
        Ok(())
    }

    /// Pixelwise map producing points on the same manifold.
    pub fn map_points<F>(&self, f: F) -> Result<ManifoldImage>
    where
        F: Fn(usize, &[f64]) -> Result<Vec<f64>> + Sync,
    {
        let pts = crate::par::map_indexed(self.len(), |k| f(k, self.point(k)).map_err(|e| e.at_pixel(k)))?;
        let data = pts.into_iter().flatten().collect();
        Ok(ManifoldImage::from_raw(self.grid, self.manifold.clone(), data))
    }
}

/// `s` tangent vectors per pixel, based at the pixels of `base`.
#[derive(Clone, Debug)]
pub struct TangentField {
    base: ManifoldImage,
    s: usize,
    data: Vec<f64>,
}

impl TangentField {
    pub fn new(base: ManifoldImage, s: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != base.len() * s * base.point_len() {
            return Err(Error::ShapeMismatch("tangent field length".into()));
        }
        Ok(TangentField { base, s, data })
    }

    /// Checks that every vector is tangent at its base pixel.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for k in 0..self.base.len() {
            for c in 0..self.s {
                self.base
                    .manifold()
                    .check_tangent(self.base.point(k), self.vector(k, c), tol)
                    .map_err(|e| e.at_pixel(k))?;
            }
        }
        Ok(())
    }

    pub fn zeros(base: ManifoldImage, s: usize) -> Self {
        let n = base.len() * s * base.point_len();
        TangentField { base, s, data: vec![0.0; n] }
    }

    pub fn base(&self) -> &ManifoldImage {
        &self.base
    }

    pub fn components(&self) -> usize {
        self.s
    }

    pub fn vector(&self, k: usize, c: usize) -> &[f64] {
        let l = self.base.point_len();
        let o = (k * self.s + c) * l;
        &self.data[o..o + l]
    }

    pub fn vector_mut(&mut self, k: usize, c: usize) -> &mut [f64] {
        let l = self.base.point_len();
        let o = (k * self.s + c) * l;
        &mut self.data[o..o + l]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_parts(self) -> (ManifoldImage, Vec<f64>) {
        (self.base, self.data)
    }
}
