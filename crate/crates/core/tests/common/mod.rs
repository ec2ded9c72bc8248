#![allow(dead_code)]

use std::sync::Arc;

use manivar::linalg::{norm, scale, sub};
use manivar::manifold::{random_tangent, Manifold};
use manivar::manifolds::{Circle, Rotations, Spd, Sphere};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn all_manifolds() -> Vec<Arc<dyn Manifold>> {
    vec![
        Arc::new(Circle),
        Arc::new(Sphere::new(2)),
        Arc::new(Sphere::new(3)),
        Arc::new(Rotations),
        Arc::new(Spd::new(2)),
        Arc::new(Spd::new(3)),
    ]
}

/// Tangent at `x` with norm exactly `r` (zero if the manifold has no room).
pub fn tangent_of_norm(m: &dyn Manifold, x: &[f64], r: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v = random_tangent(m, x, 1.0, rng);
    let n = m.norm(x, &v);
    if n == 0.0 {
        v
    } else {
        scale(&v, r / n)
    }
}

/// A point at distance `r` from `x` in a random direction.
pub fn point_at(m: &dyn Manifold, x: &[f64], r: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v = tangent_of_norm(m, x, r, rng);
    m.exp(x, &v)
}

/// Relative error `|a - b| / max(|b|, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    norm(&sub(a, b)) / norm(b).max(floor)
}
