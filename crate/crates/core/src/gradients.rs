//! Riemannian gradients of the smoothed intrinsic energies.
//!
//! The tangent-field variable of the TGV model is moved by parallel
//! transport when its base moves, so the point gradient is the covariant
//! (horizontal) one and the tangent gradient is the plain gradient within
//! each fixed tangent space.

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::energies::{energy, field_components, model_terms, ModelConfig, ModelKind, ModelState};
use crate::error::{Error, Result};
use crate::image::{ManifoldImage, PixelGrid, TangentField};
use crate::linalg::{axpy, scale};
use crate::manifold::{random_tangent, Manifold};
use crate::terms::{term_gradient, Accum, Grouping};

pub use crate::manifold::grad_dist_sq;

/// A tangent vector of the product manifold of a model state, used both
/// for gradients and for search directions.
#[derive(Clone, Debug)]
pub struct GradientBundle {
    /// One vector per pixel for each image of the state, in slot order.
    pub grad_points: Vec<TangentField>,
    /// Perturbation of `ξ` at its fixed base, for the pole-ladder TGV model.
    pub grad_tangent: Option<TangentField>,
}

impl GradientBundle {
    pub fn zeros(state: &ModelState) -> Self {
        GradientBundle {
            grad_points: state.images().into_iter().map(|u| TangentField::zeros(u.clone(), 1)).collect(),
            grad_tangent: state.xi().map(|xi| TangentField::zeros(xi.base().clone(), xi.components())),
        }
    }

    fn fields(&self) -> impl Iterator<Item = &TangentField> {
        self.grad_points.iter().chain(self.grad_tangent.iter())
    }

    /// Riemannian inner product summed over all pixels and variables.
    pub fn inner(&self, other: &GradientBundle) -> f64 {
        let mut sum = 0.0;
        for (a, b) in self.fields().zip(other.fields()) {
            let base = a.base();
            let m = base.manifold();
            for k in 0..base.len() {
                for c in 0..a.components() {
                    sum += m.inner(base.point(k), a.vector(k, c), b.vector(k, c));
                }
            }
        }
        sum
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn scaled(&self, s: f64) -> GradientBundle {
        let sc = |f: &TangentField| TangentField::new(f.base().clone(), f.components(), scale(f.data(), s)).unwrap();
        GradientBundle {
            grad_points: self.grad_points.iter().map(sc).collect(),
            grad_tangent: self.grad_tangent.as_ref().map(sc),
        }
    }

    /// A random direction with independent standard normal coordinates in
    /// orthonormal tangent frames, scaled to unit total norm.
    pub fn random(state: &ModelState, rng: &mut dyn RngCore) -> Self {
        let field = |base: &ManifoldImage, s: usize, rng: &mut dyn RngCore| {
            let m = base.manifold();
            let mut data = Vec::with_capacity(base.len() * s * base.point_len());
            for k in 0..base.len() {
                for _ in 0..s {
                    data.extend(random_tangent(m, base.point(k), 1.0, rng));
                }
            }
            TangentField::new(base.clone(), s, data).unwrap()
        };
        let mut b = GradientBundle {
            grad_points: state.images().into_iter().map(|u| field(u, 1, rng)).collect(),
            grad_tangent: state.xi().map(|xi| field(xi.base(), xi.components(), rng)),
        };
        let n = b.norm_sq().sqrt();
        if n > 0.0 {
            b = b.scaled(1.0 / n);
        }
        b
    }

    /// Largest per-pixel norm of any component.
    pub fn max_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for f in self.fields() {
            let base = f.base();
            for k in 0..base.len() {
                for c in 0..f.components() {
                    best = best.max(base.manifold().norm(base.point(k), f.vector(k, c)));
                }
            }
        }
        best
    }
}

/// Full Riemannian gradient of the smoothed energy of `cfg.model`.
pub fn grad_energy(cfg: &ModelConfig, state: &ModelState, f: &ManifoldImage) -> Result<GradientBundle> {
    Ok(energy_and_gradient(cfg, state, f)?.1)
}

/// Total energy and gradient in one pass.
pub fn energy_and_gradient(cfg: &ModelConfig, state: &ModelState, f: &ManifoldImage) -> Result<(f64, GradientBundle)> {
    cfg.validate()?;
    if cfg.epsilon <= 0.0 {
        return Err(Error::InvalidParameter("gradients need epsilon > 0".into()));
    }
    state.check(cfg.model, f)?;
    let (data, priors) = model_terms(cfg, state)?;
    let ctx = state.ctx(f);
    let images = state.images();
    let s = state.xi().map_or(1, |x| x.components());
    let mut acc = Accum::new(images.len(), f.len(), f.point_len(), s);
    let mut total = term_gradient(data, &ctx, 0.0, Grouping::PerPixel, 1.0, &mut acc)?;
    for (t, w, g) in priors {
        if w != 0.0 && cfg.alpha != 0.0 {
            total += cfg.alpha * w * term_gradient(t, &ctx, cfg.epsilon, g, cfg.alpha * w, &mut acc)?;
        }
    }
    let grad_points = images
        .iter()
        .zip(acc.images)
        .map(|(u, d)| TangentField::new((*u).clone(), 1, d))
        .collect::<Result<Vec<_>>>()?;
    let grad_tangent = match state.xi() {
        Some(xi) => Some(TangentField::new(xi.base().clone(), s, acc.xi)?),
        None => None,
    };
    Ok((total, GradientBundle { grad_points, grad_tangent }))
}

/// Moves every variable by `t · dir`: points by `exp`, the tangent field by
/// adding its component and transporting along the step geodesic.
pub fn exp_state(state: &ModelState, dir: &GradientBundle, t: f64) -> Result<ModelState> {
    let step = |u: &ManifoldImage, d: &TangentField| -> Result<ManifoldImage> {
        let m = u.manifold();
        u.map_points(|k, p| Ok(m.exp(p, &scale(d.vector(k, 0), t))))
    };
    Ok(match state {
        ModelState::Image(u) => ModelState::Image(step(u, &dir.grad_points[0])?),
        ModelState::Pair { v, w } => {
            ModelState::Pair { v: step(v, &dir.grad_points[0])?, w: step(w, &dir.grad_points[1])? }
        }
        ModelState::LieTgv { u, a } => ModelState::LieTgv {
            u: step(u, &dir.grad_points[0])?,
            a: a.iter().zip(&dir.grad_points[1..]).map(|(ai, d)| step(ai, d)).collect::<Result<_>>()?,
        },
        ModelState::Tangent(xi) => {
            let u = xi.base();
            let du = &dir.grad_points[0];
            let dxi = dir.grad_tangent.as_ref().expect("tangent direction");
            let new_u = step(u, du)?;
            let m = u.manifold();
            let s = xi.components();
            let vecs = crate::par::map_indexed(u.len(), |k| {
                let mut out = Vec::with_capacity(s * u.point_len());
                for c in 0..s {
                    let mut w = xi.vector(k, c).to_vec();
                    axpy(&mut w, t, dxi.vector(k, c));
                    let moved = m.transport_along(u.point(k), du.vector(k, 0), t, &w);
                    out.extend(m.project_tangent(new_u.point(k), &moved));
                }
                Ok(out)
            })?;
            ModelState::Tangent(TangentField::new(new_u, s, vecs.concat())?)
        }
    })
}

/// Outcome of a directional finite-difference check.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub directions: usize,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
}

/// Compares `⟨grad E, η⟩` with the central difference of `E(exp(h η))`
/// over random unit directions `η`.
pub fn directional_check(
    cfg: &ModelConfig,
    state: &ModelState,
    f: &ManifoldImage,
    directions: usize,
    h: f64,
    rng: &mut dyn RngCore,
) -> Result<GradCheck> {
    let g = grad_energy(cfg, state, f)?;
    let e = |s: &ModelState| -> Result<f64> { Ok(energy(cfg, s, f)?.total) };
    let mut worst: f64 = 0.0;
    let mut sum = 0.0;
    for _ in 0..directions {
        let eta = GradientBundle::random(state, rng);
        let an = g.inner(&eta);
        let fd = (e(&exp_state(state, &eta, h)?)? - e(&exp_state(state, &eta, -h)?)?) / (2.0 * h);
        let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-12);
        worst = worst.max(rel);
        sum += rel;
    }
    Ok(GradCheck { directions, max_rel_err: worst, mean_rel_err: sum / directions.max(1) as f64 })
}

/// Values and gradients of the two TGV summands at pixel `i` of a signal:
/// `F₁ = ‖log_{u_i} u_{i+1} − ξ_i‖²` and `F₂ = ‖ξ_i − P_{u_{i−1}→u_i}(ξ_{i−1})‖²`.
///
/// Point gradients are covariant: the tangent arguments ride along by
/// parallel transport.
#[derive(Clone, Debug)]
pub struct TgvPixelGradients {
    pub f1: f64,
    pub f1_xi: Vec<f64>,
    pub f1_u: Vec<f64>,
    pub f1_u_next: Vec<f64>,
    pub f2: f64,
    pub f2_xi: Vec<f64>,
    pub f2_xi_prev: Vec<f64>,
    pub f2_u: Vec<f64>,
    pub f2_u_prev: Vec<f64>,
}

pub fn grad_tgv_xi_terms(xi: &TangentField, i: usize) -> Result<TgvPixelGradients> {
    use crate::terms::{Group, Slot};
    let u = xi.base();
    if u.grid().n2 != 1 || i == 0 || i + 1 >= u.len() {
        return Err(Error::InvalidParameter(format!("pixel {i} is not interior to a signal")));
    }
    let m = u.manifold();
    let pick = |g: &Group<'_>, slot: Slot, pixel: usize| -> Vec<f64> {
        let mut out = vec![0.0; u.point_len()];
        for c in g.contribs.iter().filter(|c| c.slot == slot && c.pixel == pixel) {
            axpy(&mut out, 1.0, &c.vec);
        }
        out
    };
    let p = |k: usize| (Slot::Img(0), k, u.point(k));
    let x = |k: usize| (Slot::Xi(0), k, xi.vector(k, 0));

    let mut g1 = Group::new(m, true);
    g1.residual_sq(p(i), Some(p(i + 1)), x(i)).map_err(|e| e.at_pixel(i))?;
    let mut g2 = Group::new(m, true);
    g2.ladder_sq(p(i - 1), p(i), x(i - 1), x(i)).map_err(|e| e.at_pixel(i))?;
    Ok(TgvPixelGradients {
        f1: g1.s,
        f1_xi: pick(&g1, Slot::Xi(0), i),
        f1_u: pick(&g1, Slot::Img(0), i),
        f1_u_next: pick(&g1, Slot::Img(0), i + 1),
        f2: g2.s,
        f2_xi: pick(&g2, Slot::Xi(0), i),
        f2_xi_prev: pick(&g2, Slot::Xi(0), i - 1),
        f2_u: pick(&g2, Slot::Img(0), i),
        f2_u_prev: pick(&g2, Slot::Img(0), i - 1),
    })
}

/// A point at a uniformly random distance below `spread` from `c`.
fn point_near(m: &dyn Manifold, c: &[f64], spread: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let v = random_tangent(m, c, 1.0, rng);
    let n = m.norm(c, &v);
    let r = spread * rng.random::<f64>();
    if n == 0.0 {
        c.to_vec()
    } else {
        m.exp(c, &scale(&v, r / n))
    }
}

/// Random data `f` and a random state of `model` scattered around a common
/// random centre, for gradient checks. Lie-group components scatter around
/// the identity and `ξ` has norms below `0.4`.
pub fn random_state(
    model: ModelKind,
    m: Arc<dyn Manifold>,
    grid: PixelGrid,
    spread: f64,
    rng: &mut dyn RngCore,
) -> Result<(ModelState, ManifoldImage)> {
    let c = m.random_point(rng);
    let image = |centre: &[f64], spread: f64, rng: &mut dyn RngCore| {
        let pts: Vec<Vec<f64>> = (0..grid.len()).map(|_| point_near(m.as_ref(), centre, spread, rng)).collect();
        ManifoldImage::from_points(grid, m.clone(), &pts)
    };
    let f = image(&c, spread, rng)?;
    let u = image(&c, spread, rng)?;
    let s = field_components(grid);
    let identity = || m.as_lie_group().map(|g| g.identity()).ok_or_else(|| Error::NotLieGroup(m.name()));
    let state = match model {
        ModelKind::Tv | ModelKind::Additive => ModelState::Image(u),
        ModelKind::IcMidpoint => ModelState::Pair { v: u, w: image(&c, spread, rng)? },
        ModelKind::IcLie => ModelState::Pair { v: u, w: image(&identity()?, spread, rng)? },
        ModelKind::TgvPole => {
            let mut data = Vec::new();
            for k in 0..u.len() {
                for _ in 0..s {
                    let v = random_tangent(m.as_ref(), u.point(k), 1.0, rng);
                    let n = m.norm(u.point(k), &v);
                    let r = 0.4 * rng.random::<f64>();
                    data.extend(if n == 0.0 { v } else { scale(&v, r / n) });
                }
            }
            ModelState::Tangent(TangentField::new(u, s, data)?)
        }
        ModelKind::TgvLie => {
            let e = identity()?;
            let a = (0..s).map(|_| image(&e, spread, rng)).collect::<Result<Vec<_>>>()?;
            ModelState::LieTgv { u, a }
        }
        other => return Err(Error::InvalidParameter(format!("{other} has no intrinsic state"))),
    };
    Ok((state, f))
}
