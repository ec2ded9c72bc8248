//! Concrete manifolds: the circle, spheres, rotations and SPD matrices.

mod circle;
mod rotation;
mod sphere;
mod spd;

use std::sync::Arc;

pub use circle::{wrap_angle, Circle};
pub use rotation::{axis_angle, canonicalize, quat_conj, quat_mul, rotation_matrix, Rotations};
pub use spd::{Spd, PROJECTION_SHIFT};
pub use sphere::Sphere;

use crate::error::{Error, Result};
use crate::manifold::Manifold;

/// Looks up a manifold by its tag (`s1`, `s2`, `s3`, `sN`, `so3`, `spd2`, `spdN`).
pub fn from_name(name: &str) -> Result<Arc<dyn Manifold>> {
    let bad = || Error::UnknownName(format!("manifold {name}"));
    if name == "s1" {
        return Ok(Arc::new(Circle));
    }
    if name == "so3" {
        return Ok(Arc::new(Rotations));
    }
    if let Some(r) = name.strip_prefix("spd") {
        let r: usize = r.parse().map_err(|_| bad())?;
        if r == 0 {
            return Err(bad());
        }
        return Ok(Arc::new(Spd::new(r)));
    }
    if let Some(d) = name.strip_prefix('s') {
        let d: usize = d.parse().map_err(|_| bad())?;
        if d < 2 {
            return Err(bad());
        }
        return Ok(Arc::new(Sphere::new(d)));
    }
    Err(bad())
}
