//! Karcher means and default starting points.

use crate::differences::{gradient_intrinsic, identity_image, lie_forward_diff};
use crate::energies::{field_components, ModelConfig, ModelKind, ModelState};
use crate::error::{Error, Result};
use crate::image::{Axis, ManifoldImage};
use crate::linalg::axpy;
use crate::manifold::Manifold;

pub const KARCHER_TOL: f64 = 1e-10;
pub const KARCHER_MAX_ITER: usize = 100;

/// Riemannian center of mass by the iteration `x ← exp_x(mean log_x p)`,
/// started at the first point.
pub fn karcher_mean<'a, I>(m: &dyn Manifold, points: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let pts: Vec<&[f64]> = points.into_iter().collect();
    let Some(first) = pts.first() else {
        return Err(Error::InvalidParameter("mean of no points".into()));
    };
    let mut x = first.to_vec();
    let n = pts.len() as f64;
    for _ in 0..KARCHER_MAX_ITER {
        let mut v = vec![0.0; x.len()];
        for p in &pts {
            axpy(&mut v, 1.0 / n, &m.log(&x, p)?);
        }
        let v = m.project_tangent(&x, &v);
        x = m.exp(&x, &v);
        if m.norm(&x, &v) < KARCHER_TOL {
            break;
        }
    }
    Ok(x)
}

/// Starting point of the descent solvers: `u = f`, `ξ = ∇f`,
/// `(v, w) = (f, mean f)` for the midpoint IC, `(f, e)` for the Lie IC and
/// `a = D^Lie f` for the Lie TGV model.
pub fn initial_state(cfg: &ModelConfig, f: &ManifoldImage) -> Result<ModelState> {
    Ok(match cfg.model {
        ModelKind::Tv | ModelKind::Additive => ModelState::Image(f.clone()),
        ModelKind::TgvPole => {
            let g = gradient_intrinsic(f)?;
            let s = field_components(f.grid());
            if s == g.components() {
                ModelState::Tangent(g)
            } else {
                // Signals: keep only the x component.
                let data: Vec<f64> = (0..f.len()).flat_map(|k| g.vector(k, 0).to_vec()).collect();
                ModelState::Tangent(crate::image::TangentField::new(f.clone(), s, data)?)
            }
        }
        ModelKind::IcMidpoint => {
            let mean = karcher_mean(f.manifold(), f.points())?;
            ModelState::Pair { v: f.clone(), w: ManifoldImage::constant(f.grid(), f.manifold_arc(), &mean)? }
        }
        ModelKind::IcLie => ModelState::Pair { v: f.clone(), w: identity_image(f.grid(), f.manifold_arc())? },
        ModelKind::TgvLie => {
            let s = field_components(f.grid());
            let a = Axis::BOTH[..s].iter().map(|&ax| lie_forward_diff(f, ax)).collect::<Result<_>>()?;
            ModelState::LieTgv { u: f.clone(), a }
        }
        m => return Err(Error::InvalidParameter(format!("{m} is solved by ADMM"))),
    })
}
