//! Energy functionals of the intrinsic models.
//!
//! Square roots are smoothed as `sqrt(S + ε²)`. With `ε = 0` the values
//! are the exact (nonsmooth) energies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{ManifoldImage, TangentField};
use crate::lie::{word_value, Letter};
use crate::terms::{term_value, Ctx, Term};

pub use crate::terms::Grouping;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Tv,
    Additive,
    IcMidpoint,
    TgvPole,
    IcLie,
    TgvLie,
    ExtIc,
    ExtTgv,
    ExtAdditive,
}

impl ModelKind {
    pub const INTRINSIC: [ModelKind; 6] =
        [ModelKind::Tv, ModelKind::Additive, ModelKind::IcMidpoint, ModelKind::TgvPole, ModelKind::IcLie, ModelKind::TgvLie];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tv => "tv",
            ModelKind::Additive => "additive",
            ModelKind::IcMidpoint => "ic_midpoint",
            ModelKind::TgvPole => "tgv_pole",
            ModelKind::IcLie => "ic_lie",
            ModelKind::TgvLie => "tgv_lie",
            ModelKind::ExtIc => "ext_ic",
            ModelKind::ExtTgv => "ext_tgv",
            ModelKind::ExtAdditive => "ext_additive",
        }
    }

    pub fn is_extrinsic(self) -> bool {
        matches!(self, ModelKind::ExtIc | ModelKind::ExtTgv | ModelKind::ExtAdditive)
    }

    pub fn needs_lie_group(self) -> bool {
        matches!(self, ModelKind::IcLie | ModelKind::TgvLie)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            ModelKind::Tv,
            ModelKind::Additive,
            ModelKind::IcMidpoint,
            ModelKind::TgvPole,
            ModelKind::IcLie,
            ModelKind::TgvLie,
            ModelKind::ExtIc,
            ModelKind::ExtTgv,
            ModelKind::ExtAdditive,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Root grouping of the Lie TGV prior.
    pub lie_tgv_grouping: Grouping,
}

impl ModelConfig {
    pub fn new(model: ModelKind, alpha: f64, beta: f64, epsilon: f64) -> Self {
        ModelConfig { model, alpha, beta, epsilon, lie_tgv_grouping: Grouping::PerPixel }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {}", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {} outside [0, 1]", self.beta)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyValue {
    pub total: f64,
    pub data_part: f64,
    pub prior_part: f64,
}

/// Variables of a model.
#[derive(Clone, Debug)]
pub enum ModelState {
    /// `u` for TV and additive models.
    Image(ManifoldImage),
    /// `(v, w)` for the IC models.
    Pair { v: ManifoldImage, w: ManifoldImage },
    /// `(u, ξ)` for the pole-ladder TGV model; `u` is the base of `ξ`.
    Tangent(TangentField),
    /// `(u, a_1, …, a_s)` for the Lie TGV model.
    LieTgv { u: ManifoldImage, a: Vec<ManifoldImage> },
}

impl ModelState {
    /// Images in slot order.
    pub fn images(&self) -> Vec<&ManifoldImage> {
        match self {
            ModelState::Image(u) => vec![u],
            ModelState::Pair { v, w } => vec![v, w],
            ModelState::Tangent(xi) => vec![xi.base()],
            ModelState::LieTgv { u, a } => std::iter::once(u).chain(a.iter()).collect(),
        }
    }

    pub fn xi(&self) -> Option<&TangentField> {
        match self {
            ModelState::Tangent(xi) => Some(xi),
            _ => None,
        }
    }

    /// The restored image: `u`, `γ(v, w; ½)` or `v ∘ w`.
    pub fn reconstruction(&self, model: ModelKind) -> Result<ManifoldImage> {
        match (self, model) {
            (ModelState::Pair { v, w }, ModelKind::IcMidpoint) => {
                let m = v.manifold();
                v.map_points(|k, p| crate::differences::midpoint(m, p, w.point(k)))
            }
            (ModelState::Pair { v, w }, ModelKind::IcLie) => {
                let g = crate::differences::lie_group(v.manifold())?;
                v.map_points(|k, p| Ok(word_value(g, &[Letter::plain(p), Letter::plain(w.point(k))])))
            }
            (ModelState::Pair { .. }, m) => Err(Error::InvalidParameter(format!("pair state for model {m}"))),
            _ => Ok(self.images()[0].clone()),
        }
    }

    pub(crate) fn check(&self, model: ModelKind, f: &ManifoldImage) -> Result<()> {
        for img in self.images() {
            img.check_compatible(f)?;
        }
        let ok = matches!(
            (self, model),
            (ModelState::Image(_), ModelKind::Tv | ModelKind::Additive)
                | (ModelState::Pair { .. }, ModelKind::IcMidpoint | ModelKind::IcLie)
                | (ModelState::Tangent(_), ModelKind::TgvPole)
                | (ModelState::LieTgv { .. }, ModelKind::TgvLie)
        );
        if !ok {
            return Err(Error::InvalidParameter(format!("state does not fit model {model}")));
        }
        if model.needs_lie_group() && f.manifold().as_lie_group().is_none() {
            return Err(Error::NotLieGroup(f.manifold().name()));
        }
        Ok(())
    }

    pub(crate) fn ctx<'a>(&'a self, f: &'a ManifoldImage) -> Ctx<'a> {
        Ctx { images: self.images(), xi: self.xi(), f }
    }
}

/// Number of components of `ξ` or `a`: one for signals, two for images.
pub fn field_components(grid: crate::image::PixelGrid) -> usize {
    if grid.n2 == 1 {
        1
    } else {
        2
    }
}

/// Data term and the two prior terms with their weights inside the prior.
pub(crate) fn model_terms(cfg: &ModelConfig, state: &ModelState) -> Result<(Term, Vec<(Term, f64, Grouping)>)> {
    let b = cfg.beta;
    let pp = Grouping::PerPixel;
    Ok(match cfg.model {
        ModelKind::Tv => (Term::Data(0), vec![(Term::Tv(0), 1.0, pp)]),
        ModelKind::Additive => (Term::Data(0), vec![(Term::Tv(0), b, pp), (Term::Tv2Int(0), 1.0 - b, pp)]),
        ModelKind::IcMidpoint => (Term::DataMidpoint, vec![(Term::Tv(0), b, pp), (Term::Tv2Int(1), 1.0 - b, pp)]),
        ModelKind::IcLie => (Term::DataLie, vec![(Term::Tv(0), b, pp), (Term::Tv2Lie(1), 1.0 - b, pp)]),
        ModelKind::TgvPole => (Term::Data(0), vec![(Term::TgvFirst, b, pp), (Term::TgvSecond, 1.0 - b, pp)]),
        ModelKind::TgvLie => {
            let s = match state {
                ModelState::LieTgv { a, .. } => a.len(),
                _ => 0,
            };
            let g = cfg.lie_tgv_grouping;
            (Term::Data(0), vec![(Term::LieTgvFirst(s), b, g), (Term::LieTgvSecond(s), 1.0 - b, g)])
        }
        m => return Err(Error::InvalidParameter(format!("{m} is an extrinsic model"))),
    })
}

/// Energy of an intrinsic model.
pub fn energy(cfg: &ModelConfig, state: &ModelState, f: &ManifoldImage) -> Result<EnergyValue> {
    cfg.validate()?;
    state.check(cfg.model, f)?;
    let (data, priors) = model_terms(cfg, state)?;
    let ctx = state.ctx(f);
    let data_part = term_value(data, &ctx, 0.0, Grouping::PerPixel)?;
    let mut prior_part = 0.0;
    for (t, w, g) in priors {
        if w != 0.0 {
            prior_part += w * term_value(t, &ctx, cfg.epsilon, g)?;
        }
    }
    Ok(EnergyValue { total: data_part + cfg.alpha * prior_part, data_part, prior_part })
}

fn single(u: &ManifoldImage, term: Term, eps: f64) -> Result<f64> {
    let ctx = Ctx { images: vec![u], xi: None, f: u };
    term_value(term, &ctx, eps, Grouping::PerPixel)
}

/// `½ Σ dist²(f_i, u_i)`.
pub fn data_term(u: &ManifoldImage, f: &ManifoldImage) -> Result<f64> {
    u.check_compatible(f)?;
    let ctx = Ctx { images: vec![u], xi: None, f };
    term_value(Term::Data(0), &ctx, 0.0, Grouping::PerPixel)
}

pub fn tv_int(u: &ManifoldImage, eps: f64) -> Result<f64> {
    single(u, Term::Tv(0), eps)
}

pub fn tv2_int(u: &ManifoldImage, eps: f64) -> Result<f64> {
    single(u, Term::Tv2Int(0), eps)
}

pub fn tv2_lie(u: &ManifoldImage, eps: f64) -> Result<f64> {
    single(u, Term::Tv2Lie(0), eps)
}

pub fn energy_additive(u: &ManifoldImage, f: &ManifoldImage, cfg: &ModelConfig) -> Result<EnergyValue> {
    energy(&ModelConfig { model: ModelKind::Additive, ..*cfg }, &ModelState::Image(u.clone()), f)
}

pub fn energy_ic_midpoint(v: &ManifoldImage, w: &ManifoldImage, f: &ManifoldImage, cfg: &ModelConfig) -> Result<EnergyValue> {
    let st = ModelState::Pair { v: v.clone(), w: w.clone() };
    energy(&ModelConfig { model: ModelKind::IcMidpoint, ..*cfg }, &st, f)
}

pub fn energy_tgv_pole(xi: &TangentField, f: &ManifoldImage, cfg: &ModelConfig) -> Result<EnergyValue> {
    energy(&ModelConfig { model: ModelKind::TgvPole, ..*cfg }, &ModelState::Tangent(xi.clone()), f)
}

pub fn energy_ic_lie(v: &ManifoldImage, w: &ManifoldImage, f: &ManifoldImage, cfg: &ModelConfig) -> Result<EnergyValue> {
    let st = ModelState::Pair { v: v.clone(), w: w.clone() };
    energy(&ModelConfig { model: ModelKind::IcLie, ..*cfg }, &st, f)
}

pub fn energy_tgv_lie(u: &ManifoldImage, a: &[ManifoldImage], f: &ManifoldImage, cfg: &ModelConfig) -> Result<EnergyValue> {
    let st = ModelState::LieTgv { u: u.clone(), a: a.to_vec() };
    energy(&ModelConfig { model: ModelKind::TgvLie, ..*cfg }, &st, f)
}
