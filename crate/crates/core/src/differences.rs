//! First- and second-order differences on the pixel grid.
//!
//! Intrinsic differences use `log` and geodesic midpoints, Lie-group
//! differences replace subtraction by `a ∘ b⁻¹`. Stencil windows follow the
//! Euclidean operators: forward differences vanish on the last row/column,
//! backward and second differences are interior-only.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::{Axis, ManifoldImage, PixelGrid, TangentField};
use crate::lie::{word_dist, word_value, Letter};
use crate::manifold::{LieGroup, Manifold};
use crate::par::map_indexed;
use crate::transport::pole_ladder;

/// `(D_axis u)_i = log_{u_i} u_{i+e}`, zero on the far boundary.
pub fn forward_diff_intrinsic(u: &ManifoldImage, axis: Axis) -> Result<TangentField> {
    let m = u.manifold();
    let g = u.grid();
    let vecs = map_indexed(g.len(), |k| match g.step(k, axis, 1) {
        Some(j) => m.log(u.point(k), u.point(j)).map_err(|e| e.at_pixel(k)),
        None => Ok(vec![0.0; u.point_len()]),
    })?;
    TangentField::new(u.clone(), 1, vecs.concat())
}

/// Both forward differences stacked as two components per pixel.
pub fn gradient_intrinsic(u: &ManifoldImage) -> Result<TangentField> {
    let dx = forward_diff_intrinsic(u, Axis::X)?;
    let dy = forward_diff_intrinsic(u, Axis::Y)?;
    let mut out = TangentField::zeros(u.clone(), 2);
    for k in 0..u.len() {
        out.vector_mut(k, 0).copy_from_slice(dx.vector(k, 0));
        out.vector_mut(k, 1).copy_from_slice(dy.vector(k, 0));
    }
    Ok(out)
}

/// `(D̃_axis ξ)_i = ξ_i − P_{u_{i−e}→u_i}(ξ_{i−e})` on interior pixels,
/// applied to every component of `xi`.
pub fn backward_diff_pole(xi: &TangentField, axis: Axis) -> Result<TangentField> {
    let u = xi.base();
    let m = u.manifold();
    let g = u.grid();
    let s = xi.components();
    let l = u.point_len();
    let vecs = map_indexed(g.len(), |k| {
        let mut out = vec![0.0; s * l];
        if !g.interior(k, axis) {
            return Ok(out);
        }
        let j = g.step(k, axis, -1).unwrap();
        for c in 0..s {
            let p = pole_ladder(m, u.point(j), u.point(k), xi.vector(j, c)).map_err(|e| e.at_pixel(k))?;
            for (o, (a, b)) in out[c * l..(c + 1) * l].iter_mut().zip(xi.vector(k, c).iter().zip(&p)) {
                *o = a - b;
            }
        }
        Ok(out)
    })?;
    TangentField::new(u.clone(), s, vecs.concat())
}

/// Midpoint of the minimizing geodesic; ambiguous at cut points.
pub fn midpoint(m: &dyn Manifold, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    m.geodesic(x, y, 0.5).map_err(|e| match e {
        Error::CutLocus(_) => Error::AmbiguousMidpoint,
        e => e,
    })
}

/// `dist(γ(x1, x3; ½), x2)`.
pub fn d2_midpoint(m: &dyn Manifold, x1: &[f64], x2: &[f64], x3: &[f64]) -> Result<f64> {
    Ok(m.dist(&midpoint(m, x1, x3)?, x2))
}

/// `dist(γ(x1, x3; ½), γ(x2, x4; ½))`.
pub fn d11_mixed(m: &dyn Manifold, x1: &[f64], x2: &[f64], x3: &[f64], x4: &[f64]) -> Result<f64> {
    Ok(m.dist(&midpoint(m, x1, x3)?, &midpoint(m, x2, x4)?))
}

/// `(i − e, i, i + e)` when both neighbours exist.
pub fn second_stencil(g: &PixelGrid, k: usize, axis: Axis) -> Option<[usize; 3]> {
    Some([g.step(k, axis, -1)?, k, g.step(k, axis, 1)?])
}

/// Plaquette of the mixed difference `D_{ab} = D̃_b D_a` at pixel `k`, where
/// `a` is `first` and `b` the other axis.
///
/// Returns `[i, i−e_b, i+e_a−e_b, i+e_a]`: the first and third entries are
/// one diagonal of the plaquette, the second and fourth the other. The
/// window is `i ± e_b, i + e_a ∈ Γ`.
pub fn mixed_stencil(g: &PixelGrid, k: usize, first: Axis) -> Option<[usize; 4]> {
    let (a, b) = match first {
        Axis::X => ((1, 0), (0, 1)),
        Axis::Y => ((0, 1), (1, 0)),
    };
    g.offset(k, b.0, b.1)?;
    let ia = g.offset(k, a.0, a.1)?;
    let ib = g.offset(k, -b.0, -b.1)?;
    let iab = g.offset(k, a.0 - b.0, a.1 - b.1)?;
    Some([k, ib, iab, ia])
}

/// Per-pixel absolute second differences.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SecondDiffs {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub yx: f64,
}

impl SecondDiffs {
    pub fn sum_sq(&self) -> f64 {
        self.xx * self.xx + self.yy * self.yy + self.xy * self.xy + self.yx * self.yx
    }
}

pub fn second_diffs_at(u: &ManifoldImage, k: usize) -> Result<SecondDiffs> {
    let m = u.manifold();
    let g = u.grid();
    let p = |i: usize| u.point(i);
    let d2 = |axis| -> Result<f64> {
        match second_stencil(&g, k, axis) {
            Some([a, b, c]) => d2_midpoint(m, p(a), p(b), p(c)),
            None => Ok(0.0),
        }
    };
    let d11 = |first| -> Result<f64> {
        match mixed_stencil(&g, k, first) {
            Some([a, b, c, d]) => d11_mixed(m, p(a), p(b), p(c), p(d)),
            None => Ok(0.0),
        }
    };
    let r = (|| {
        Ok(SecondDiffs { xx: d2(Axis::X)?, yy: d2(Axis::Y)?, xy: d11(Axis::X)?, yx: d11(Axis::Y)? })
    })();
    r.map_err(|e: Error| e.at_pixel(k))
}

pub fn second_diffs_image(u: &ManifoldImage) -> Result<Vec<SecondDiffs>> {
    map_indexed(u.len(), |k| second_diffs_at(u, k))
}

pub(crate) fn lie_group(m: &dyn Manifold) -> Result<&dyn LieGroup> {
    m.as_lie_group().ok_or_else(|| Error::NotLieGroup(m.name()))
}

fn group_image(u: &ManifoldImage, f: impl Fn(&dyn LieGroup, usize) -> Vec<f64> + Sync) -> Result<ManifoldImage> {
    let g = lie_group(u.manifold())?;
    let pts = map_indexed(u.len(), |k| Ok(f(g, k)))?;
    Ok(ManifoldImage::from_raw(u.grid(), u.manifold_arc(), pts.concat()))
}

/// `(D^Lie_axis u)_i = u_{i+e} ∘ u_i⁻¹`, identity on the far boundary.
pub fn lie_forward_diff(u: &ManifoldImage, axis: Axis) -> Result<ManifoldImage> {
    let grid = u.grid();
    group_image(u, |g, k| match grid.step(k, axis, 1) {
        Some(j) => word_value(g, &[Letter::plain(u.point(j)), Letter::inv(u.point(k))]),
        None => g.identity(),
    })
}

/// `(D̃^Lie_axis u)_i = u_i ∘ u_{i−e}⁻¹` on interior pixels, identity otherwise.
pub fn lie_backward_diff(u: &ManifoldImage, axis: Axis) -> Result<ManifoldImage> {
    let grid = u.grid();
    group_image(u, |g, k| {
        if grid.interior(k, axis) {
            let j = grid.step(k, axis, -1).unwrap();
            word_value(g, &[Letter::plain(u.point(k)), Letter::inv(u.point(j))])
        } else {
            g.identity()
        }
    })
}

/// Word of `D^Lie_{axis,axis}` at `k`, if the window is complete.
pub fn lie_second_word<'a>(u: &'a ManifoldImage, k: usize, axis: Axis) -> Option<[Letter<'a>; 4]> {
    let [a, b, c] = second_stencil(&u.grid(), k, axis)?;
    Some([Letter::plain(u.point(c)), Letter::inv(u.point(b)), Letter::plain(u.point(a)), Letter::inv(u.point(b))])
}

/// Word of the mixed `D^Lie_{ab}` at `k`, if the window is complete.
pub fn lie_mixed_word<'a>(u: &'a ManifoldImage, k: usize, first: Axis) -> Option<[Letter<'a>; 4]> {
    let [a, b, c, d] = mixed_stencil(&u.grid(), k, first)?;
    Some([Letter::plain(u.point(d)), Letter::inv(u.point(a)), Letter::plain(u.point(b)), Letter::inv(u.point(c))])
}

/// Group-valued second differences, identity outside their windows.
#[derive(Clone, Debug)]
pub struct LieSecondDiffs {
    pub xx: ManifoldImage,
    pub yy: ManifoldImage,
    pub xy: ManifoldImage,
    pub yx: ManifoldImage,
}

pub fn lie_second_diffs(u: &ManifoldImage) -> Result<LieSecondDiffs> {
    let second = |axis| {
        group_image(u, |g, k| match lie_second_word(u, k, axis) {
            Some(w) => word_value(g, &w),
            None => g.identity(),
        })
    };
    let mixed = |first| {
        group_image(u, |g, k| match lie_mixed_word(u, k, first) {
            Some(w) => word_value(g, &w),
            None => g.identity(),
        })
    };
    Ok(LieSecondDiffs { xx: second(Axis::X)?, yy: second(Axis::Y)?, xy: mixed(Axis::X)?, yx: mixed(Axis::Y)? })
}

/// `dist(D^Lie_*, e)` for the four second differences at pixel `k`.
pub fn lie_second_dists_at(u: &ManifoldImage, k: usize) -> Result<SecondDiffs> {
    let g = lie_group(u.manifold())?;
    let sd = |axis| lie_second_word(u, k, axis).map_or(0.0, |w| word_dist(g, &w));
    let md = |first| lie_mixed_word(u, k, first).map_or(0.0, |w| word_dist(g, &w));
    Ok(SecondDiffs { xx: sd(Axis::X), yy: sd(Axis::Y), xy: md(Axis::X), yx: md(Axis::Y) })
}

/// A constant image at the group identity.
pub fn identity_image(grid: PixelGrid, m: Arc<dyn Manifold>) -> Result<ManifoldImage> {
    let e = lie_group(m.as_ref())?.identity();
    ManifoldImage::constant(grid, m, &e)
}
