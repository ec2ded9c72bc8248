//! File formats, synthetic fixtures, noise, error metrics and plot data.

mod mvimg;
mod noise;
mod plot;
pub mod synth;

pub use mvimg::{decode_mvimg, encode_mvimg, read_mvimg, write_mvimg, MAGIC, TAGS};
pub use noise::{add_noise, NoiseKind, NoiseSpec};
pub use plot::{image_csv, trace_csv, value_columns};
pub use synth::synth;

use crate::error::Result;
use crate::image::ManifoldImage;

/// Mean squared geodesic distance between two images.
pub fn mse(u: &ManifoldImage, u0: &ManifoldImage) -> Result<f64> {
    u.check_compatible(u0)?;
    let m = u.manifold();
    let s: f64 = u.points().zip(u0.points()).map(|(a, b)| m.dist(a, b).powi(2)).sum();
    Ok(s / u.len() as f64)
}
