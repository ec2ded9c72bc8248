//! Synthetic test data.
//!
//! The constructions follow the usual piecewise constant / piecewise geodesic
//! test signals. Breakpoints and values not fixed by those descriptions are
//! chosen here and listed on each generator.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};
use crate::image::{ManifoldImage, PixelGrid};
use crate::manifold::Manifold;
use crate::manifolds::{axis_angle, wrap_angle, Circle, Rotations, Sphere, Spd};

/// Names accepted by [`synth`].
pub const NAMES: [&str; 7] =
    ["s1_signal", "s1_image", "s2_jump", "s2_four_segments", "so3_signal", "spd2_signal", "spd3_image"];

pub fn synth(name: &str) -> Result<ManifoldImage> {
    match name {
        "s1_signal" => s1_signal(),
        "s1_image" => s1_image(64),
        "s2_jump" => s2_jump(),
        "s2_four_segments" => s2_four_segments(),
        "so3_signal" => so3_signal(),
        "spd2_signal" => spd2_signal(),
        "spd3_image" => spd3_image(16),
        _ => Err(Error::UnknownName(format!("fixture {name}"))),
    }
}

/// Piecewise geodesic phase signal of length 100:
///
/// * `0..40`: increasing line `−1.2 + 0.06 i`
/// * `40..60`: constant `1.9`
/// * `60..70`: constant `2.4`
/// * `70..100`: decreasing line `−2.55 − 0.05 (i − 70)`, wrapped.
///
/// The step from `2.4` to `−2.55` is a jump of `2π − 4.95 ≈ 1.33` across `±π`,
/// and the wrap at `i = 82` is an artefact of the angle representation.
pub fn s1_signal() -> Result<ManifoldImage> {
    let data = (0..100)
        .map(|i| {
            let t = i as f64;
            match i {
                0..40 => -1.2 + 0.06 * t,
                40..60 => 1.9,
                60..70 => 2.4,
                _ => wrap_angle(-2.55 - 0.05 * (t - 70.0)),
            }
        })
        .collect();
    ManifoldImage::new(PixelGrid::signal(100), Arc::new(Circle), data)
}

/// Phase image of size `n × n` with coordinates `x = i1/n`, `y = i2/n`:
///
/// * background ramp `−π + 2π(0.7x + 0.5y)`, wrapped
/// * ellipse centred at `(0.35, 0.35)` with radii `(0.22, 0.14)` holding the
///   ramp `1.5 − 6(y − 0.35)`
/// * boxes `[0.62, 0.85] × [0.1, 0.3]` at `−2` and `[0.1, 0.3] × [0.65, 0.9]` at `0.8`
/// * a paraboloid `2.5 − 12 r²` inside `r = |(x, y) − (1, 1)| < 0.4`.
pub fn s1_image(n: usize) -> Result<ManifoldImage> {
    let grid = PixelGrid::new(n, n);
    let data = (0..grid.len())
        .map(|k| {
            let (i1, i2) = grid.coords(k);
            let (x, y) = (i1 as f64 / n as f64, i2 as f64 / n as f64);
            let r2 = (x - 1.0).powi(2) + (y - 1.0).powi(2);
            let v = if ((x - 0.35) / 0.22).powi(2) + ((y - 0.35) / 0.14).powi(2) < 1.0 {
                1.5 - 6.0 * (y - 0.35)
            } else if (0.62..=0.85).contains(&x) && (0.1..=0.3).contains(&y) {
                -2.0
            } else if (0.1..=0.3).contains(&x) && (0.65..=0.9).contains(&y) {
                0.8
            } else if r2 < 0.16 {
                2.5 - 12.0 * r2
            } else {
                -PI + 2.0 * PI * (0.7 * x + 0.5 * y)
            };
            wrap_angle(v)
        })
        .collect();
    ManifoldImage::new(grid, Arc::new(Circle), data)
}

fn s2_point(lat: f64, lon: f64) -> Vec<f64> {
    vec![lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Samples `γ(a, b; t0 + j (t1 − t0)/(n − 1))`, `j = 0..n`.
fn arc(m: &dyn Manifold, a: &[f64], b: &[f64], t0: f64, t1: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    (0..n).map(|j| m.geodesic(a, b, t0 + (t1 - t0) * j as f64 / (n - 1) as f64)).collect()
}

/// Length 192: three quarter great circles, north pole to `e1`, `e1` to `e2`
/// along the equator and `e2` to the south pole, each shrunk about its
/// midpoint by `1/5`, `3/20` and `1/5` and sampled with 64 points. The
/// shrinking leaves jumps between the segments.
pub fn s2_jump() -> Result<ManifoldImage> {
    let m = Sphere::new(2);
    let (np, e1, e2, sp) = (vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, -1.0]);
    let mut pts = Vec::new();
    for (a, b, s) in [(&np, &e1, 0.2), (&e1, &e2, 0.15), (&e2, &sp, 0.2)] {
        pts.extend(arc(&m, a, b, 0.5 - s / 2.0, 0.5 + s / 2.0, 64)?);
    }
    ManifoldImage::from_points(PixelGrid::signal(192), Arc::new(m), &pts)
}

/// Four segments of 20 samples, given by (latitude, longitude) corners
/// `A = (0.9, −0.6)`, `B = (0.3, −0.2)`, `C = (0.5, 0.5)`, `D = (−0.1, 0.9)`,
/// `E = (−0.7, 1.5)`: geodesic `A → B`, geodesic `B → C` (stopping one step
/// short of `C`), constant `D`, geodesic `D → E`.
pub fn s2_four_segments() -> Result<ManifoldImage> {
    let m = Sphere::new(2);
    let [a, b, c, d, e] = [(0.9, -0.6), (0.3, -0.2), (0.5, 0.5), (-0.1, 0.9), (-0.7, 1.5)].map(|(la, lo)| s2_point(la, lo));
    let mut pts = arc(&m, &a, &b, 0.0, 0.95, 20)?;
    pts.extend(arc(&m, &b, &c, 0.0, 0.95, 20)?);
    pts.extend(std::iter::repeat_n(d.clone(), 20));
    pts.extend(arc(&m, &d, &e, 0.0, 1.0, 20)?);
    ManifoldImage::from_points(PixelGrid::signal(80), Arc::new(m), &pts)
}

/// Length 64: rotations about `z` by `0.05 i` for `i < 32`, then rotations
/// about `(1, 1, 0)/√2` by `0.8 + 0.03 (i − 32)`.
pub fn so3_signal() -> Result<ManifoldImage> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pts: Vec<Vec<f64>> = (0..64)
        .map(|i| {
            if i < 32 {
                axis_angle([0.0, 0.0, 1.0], 0.05 * i as f64)
            } else {
                axis_angle([s, s, 0.0], 0.8 + 0.03 * (i - 32) as f64)
            }
        })
        .collect();
    ManifoldImage::from_points(PixelGrid::signal(64), Arc::new(Rotations), &pts)
}

/// `exp` of a symmetric matrix, via the exponential map at the identity.
fn spd_exp(m: &Spd, s: &DMatrix<f64>) -> Vec<f64> {
    let id = m.from_matrix(&DMatrix::identity(m.size(), m.size()));
    m.exp(&id, &m.from_matrix(s))
}

fn sym2(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, b, c])
}

/// Length 64: the geodesic midpoint of a piecewise constant signal `v` (four
/// parts of 16) and a signal `w` made of two geodesics of 32 samples.
/// Values are matrix exponentials of the listed symmetric matrices.
pub fn spd2_signal() -> Result<ManifoldImage> {
    let m = Spd::new(2);
    let v: Vec<Vec<f64>> = [sym2(0.0, 0.0, 0.0), sym2(0.6, 0.3, -0.2), sym2(-0.5, -0.2, 0.4), sym2(0.3, -0.4, 0.8)]
        .iter()
        .map(|s| spd_exp(&m, s))
        .collect();
    let w_ends = [sym2(-0.6, 0.1, 0.3), sym2(0.5, 0.4, -0.5), sym2(0.7, -0.3, 0.2)].map(|s| spd_exp(&m, &s));
    let mut w = arc(&m, &w_ends[0], &w_ends[1], 0.0, 1.0, 32)?;
    w.extend(arc(&m, &w_ends[1], &w_ends[2], 0.0, 1.0, 32)?);
    let pts = (0..64).map(|i| m.geodesic(&v[i / 16], &w[i], 0.5)).collect::<Result<Vec<_>>>()?;
    ManifoldImage::from_points(PixelGrid::signal(64), Arc::new(m), &pts)
}

const SPD_SCALE: f64 = 15.0;

/// `n × n` image of 3×3 SPD matrices. The background is
/// `15 Q diag(exp(s a + t b)) Qᵀ` with `s = i1/(n−1)`, `t = i2/(n−1)`, a flat
/// patch whose rows and columns are geodesics but curve in matrix entries.
/// A constant block covers `[n/3, 2n/3)²`.
///
/// The overall factor 15 only matters to models that work on matrix
/// entries; it puts the extrinsic TGV optimum near `α = 12` at `β = 0.9`.
pub fn spd3_image(n: usize) -> Result<ManifoldImage> {
    let m = Spd::new(3);
    let q = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(nalgebra::Vector3::new(1.0, 2.0, 2.0)), 0.7).into_inner();
    let (a, b) = ([1.2, -0.4, 0.3], [-0.3, 0.9, -0.8]);
    let block = Matrix3::new(-0.6, 0.2, 0.3, 0.2, 0.8, -0.1, 0.3, -0.1, 0.5);
    let block: Vec<f64> = spd_exp(&m, &DMatrix::from_iterator(3, 3, block.iter().copied())).iter().map(|v| SPD_SCALE * v).collect();
    let grid = PixelGrid::new(n, n);
    let (lo, hi) = (n / 3, 2 * n / 3);
    let scale = (n.max(2) - 1) as f64;
    let pts: Vec<Vec<f64>> = (0..grid.len())
        .map(|k| {
            let (i1, i2) = grid.coords(k);
            if (lo..hi).contains(&i1) && (lo..hi).contains(&i2) {
                return block.clone();
            }
            let (s, t) = (i1 as f64 / scale, i2 as f64 / scale);
            let d = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|j, _| (s * a[j] + t * b[j]).exp()));
            let p = SPD_SCALE * q * d * q.transpose();
            m.from_matrix(&DMatrix::from_iterator(3, 3, p.iter().copied()))
        })
        .collect();
    ManifoldImage::from_points(grid, Arc::new(m), &pts)
}
