use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::ManifoldImage;
use crate::linalg::axpy;
use crate::manifolds::wrap_angle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    /// Angle plus a Gaussian, wrapped to `[-π, π)`. Circle only.
    WrappedGaussian,
    /// `exp_u(Σ η_k Ξ_k)` with i.i.d. Gaussian `η` in an orthonormal tangent frame.
    TangentGaussian,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wrapped_gaussian" => Ok(NoiseKind::WrappedGaussian),
            "tangent_gaussian" => Ok(NoiseKind::TangentGaussian),
            _ => Err(Error::UnknownName(format!("noise kind {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

/// Corrupts every pixel independently. Pixels are visited in storage order
/// with one ChaCha8 stream, so the output depends only on `spec`.
pub fn add_noise(u: &ManifoldImage, spec: &NoiseSpec) -> Result<ManifoldImage> {
    if !(spec.sigma > 0.0) || !spec.sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("noise sigma = {}", spec.sigma)));
    }
    let m = u.manifold();
    let normal = Normal::new(0.0, spec.sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(u.data().len());
    match spec.kind {
        NoiseKind::WrappedGaussian => {
            if m.name() != "s1" {
                return Err(Error::InvalidParameter(format!("wrapped Gaussian noise needs s1, not {}", m.name())));
            }
            for p in u.points() {
                data.push(wrap_angle(p[0] + normal.sample(&mut rng)));
            }
        }
        NoiseKind::TangentGaussian => {
            for p in u.points() {
                let mut v = vec![0.0; p.len()];
                for b in m.tangent_basis(p) {
                    axpy(&mut v, normal.sample(&mut rng), &b);
                }
                data.extend(m.exp(p, &v));
            }
        }
    }
    ManifoldImage::new(u.grid(), u.manifold_arc(), data)
}
