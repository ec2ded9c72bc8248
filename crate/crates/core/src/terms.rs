//! Per-pixel groups of squared terms and their gradients.
//!
//! Every prior is a sum over pixels of `sqrt(S_i + ε²)`, where `S_i` sums a
//! few squared distances or squared tangent norms, and every data term is
//! `½ Σ_i S_i`. A `Group` accumulates `S_i` for one pixel and, on request,
//! the gradient of `S_i` with respect to each point or tangent it touched.

use crate::differences::{lie_group, lie_mixed_word, lie_second_word, mixed_stencil, second_stencil};
use crate::error::Result;
use crate::image::{Axis, ManifoldImage, TangentField};
use crate::lie::{word_dist_sq_grad, Letter};
use crate::linalg::{axpy, scale, sub};
use crate::manifold::{DiffKind, Differential, LieGroup, Manifold};
use crate::par::map_indexed;
use crate::transport::PoleLadder;

/// Which variable a gradient contribution belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Slot {
    Img(usize),
    /// Fixed data, no gradient.
    Const,
    /// Component of the tangent field of the TGV model.
    Xi(usize),
}

#[derive(Clone, Debug)]
pub(crate) struct Contrib {
    pub slot: Slot,
    pub pixel: usize,
    pub vec: Vec<f64>,
}

type PRef<'a> = (Slot, usize, &'a [f64]);

pub(crate) struct Group<'a> {
    m: &'a dyn Manifold,
    grad: bool,
    pub s: f64,
    pub contribs: Vec<Contrib>,
}

impl<'a> Group<'a> {
    pub fn new(m: &'a dyn Manifold, grad: bool) -> Self {
        Group { m, grad, s: 0.0, contribs: Vec::new() }
    }

    fn push(&mut self, r: (Slot, usize), vec: Vec<f64>) {
        self.contribs.push(Contrib { slot: r.0, pixel: r.1, vec });
    }

    /// `dist²(a, b)`.
    pub fn dist_sq(&mut self, a: PRef<'_>, b: PRef<'_>) -> Result<()> {
        let m = self.m;
        if !self.grad {
            self.s += m.dist(a.2, b.2).powi(2);
            return Ok(());
        }
        let lab = m.log(a.2, b.2)?;
        self.s += m.inner(a.2, &lab, &lab);
        let lba = m.log(b.2, a.2)?;
        self.push((a.0, a.1), scale(&lab, -2.0));
        self.push((b.0, b.1), scale(&lba, -2.0));
        Ok(())
    }

    /// Pulls a gradient `g_c` at `c = γ(a, b; ½)` back to both endpoints.
    fn pull_midpoint(&mut self, a: PRef<'_>, b: PRef<'_>, g_c: &[f64]) -> Result<()> {
        let m = self.m;
        let ga = Differential::new(m, DiffKind::GeodesicInX, a.2, b.2, 0.5)?.adjoint(g_c);
        let gb = Differential::new(m, DiffKind::GeodesicInX, b.2, a.2, 0.5)?.adjoint(g_c);
        self.push((a.0, a.1), ga);
        self.push((b.0, b.1), gb);
        Ok(())
    }

    fn mid(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        crate::differences::midpoint(self.m, a, b)
    }

    /// `d₂(x1, x2, x3)² = dist²(γ(x1, x3; ½), x2)`.
    pub fn d2_sq(&mut self, x1: PRef<'_>, x2: PRef<'_>, x3: PRef<'_>) -> Result<()> {
        let m = self.m;
        let c = self.mid(x1.2, x3.2)?;
        if !self.grad {
            self.s += m.dist(&c, x2.2).powi(2);
            return Ok(());
        }
        let l = m.log(&c, x2.2)?;
        self.s += m.inner(&c, &l, &l);
        let l2 = m.log(x2.2, &c)?;
        self.push((x2.0, x2.1), scale(&l2, -2.0));
        self.pull_midpoint(x1, x3, &scale(&l, -2.0))
    }

    /// `d₁₁(x1, x2, x3, x4)² = dist²(γ(x1, x3; ½), γ(x2, x4; ½))`.
    pub fn d11_sq(&mut self, x1: PRef<'_>, x2: PRef<'_>, x3: PRef<'_>, x4: PRef<'_>) -> Result<()> {
        let m = self.m;
        let c1 = self.mid(x1.2, x3.2)?;
        let c2 = self.mid(x2.2, x4.2)?;
        if !self.grad {
            self.s += m.dist(&c1, &c2).powi(2);
            return Ok(());
        }
        let l12 = m.log(&c1, &c2)?;
        self.s += m.inner(&c1, &l12, &l12);
        let l21 = m.log(&c2, &c1)?;
        self.pull_midpoint(x1, x3, &scale(&l12, -2.0))?;
        self.pull_midpoint(x2, x4, &scale(&l21, -2.0))
    }

    /// `dist²(word, e)`; letters without a slot are constants.
    pub fn word_sq(&mut self, g: &dyn LieGroup, word: &[Letter<'_>], refs: &[Option<(Slot, usize)>]) -> Result<()> {
        if !self.grad {
            self.s += crate::lie::word_dist(g, word).powi(2);
            return Ok(());
        }
        let (d2, grads) = word_dist_sq_grad(g, word)?;
        self.s += d2;
        for (r, v) in refs.iter().zip(grads) {
            if let Some(r) = r {
                self.push(*r, v);
            }
        }
        Ok(())
    }

    /// `‖log_{u_k} u_j − ξ‖²` at `u_k`, or `‖ξ‖²` without a neighbour.
    pub fn residual_sq(&mut self, uk: PRef<'_>, uj: Option<PRef<'_>>, xi: PRef<'_>) -> Result<()> {
        let m = self.m;
        let Some(uj) = uj else {
            self.s += m.inner(uk.2, xi.2, xi.2);
            if self.grad {
                self.push((xi.0, xi.1), scale(xi.2, 2.0));
            }
            return Ok(());
        };
        let l = m.log(uk.2, uj.2)?;
        let r = sub(&l, xi.2);
        self.s += m.inner(uk.2, &r, &r);
        if self.grad {
            let w = scale(&r, 2.0);
            let gk = Differential::new(m, DiffKind::LogInBase, uk.2, uj.2, 0.0)?.adjoint(&w);
            let gj = Differential::new(m, DiffKind::LogInArgument, uj.2, uk.2, 0.0)?.adjoint(&w);
            self.push((uk.0, uk.1), gk);
            self.push((uj.0, uj.1), gj);
            self.push((xi.0, xi.1), scale(&r, -2.0));
        }
        Ok(())
    }

    /// `‖ξ_k − P^P_{u_j→u_k} ξ_j‖²` at `u_k`.
    pub fn ladder_sq(&mut self, uj: PRef<'_>, uk: PRef<'_>, xij: PRef<'_>, xik: PRef<'_>) -> Result<()> {
        let m = self.m;
        let lad = PoleLadder::new(m, uj.2, uk.2, xij.2)?;
        let r = sub(xik.2, &lad.zeta);
        self.s += m.inner(uk.2, &r, &r);
        if self.grad {
            let g = lad.adjoint(m, &scale(&r, -2.0))?;
            self.push((uj.0, uj.1), g.x);
            self.push((uk.0, uk.1), g.y);
            self.push((xij.0, xij.1), g.xi);
            self.push((xik.0, xik.1), scale(&r, 2.0));
        }
        Ok(())
    }
}

/// Variables of a model, in slot order.
pub(crate) struct Ctx<'a> {
    pub images: Vec<&'a ManifoldImage>,
    pub xi: Option<&'a TangentField>,
    pub f: &'a ManifoldImage,
}

impl<'a> Ctx<'a> {
    fn m(&self) -> &'a dyn Manifold {
        self.f.manifold()
    }
    fn p(&self, img: usize, k: usize) -> PRef<'a> {
        (Slot::Img(img), k, self.images[img].point(k))
    }
    fn x(&self, c: usize, k: usize) -> PRef<'a> {
        (Slot::Xi(c), k, self.xi.expect("tangent field").vector(k, c))
    }
}

/// One term of an energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Term {
    /// `½ dist²(u, f)`.
    Data(usize),
    /// `½ dist²(γ(v, w; ½), f)`.
    DataMidpoint,
    /// `½ dist²(v ∘ w, f)`.
    DataLie,
    Tv(usize),
    Tv2Int(usize),
    Tv2Lie(usize),
    /// `‖∇u − ξ‖`.
    TgvFirst,
    /// `‖∇̃ ξ‖` with pole-ladder transport.
    TgvSecond,
    /// `dist(D^Lie u, a)` with `a` in image slots `1..=s`.
    LieTgvFirst(usize),
    /// `dist(D̃^Lie a, e)`.
    LieTgvSecond(usize),
}

impl Term {
    pub fn is_data(self) -> bool {
        matches!(self, Term::Data(_) | Term::DataMidpoint | Term::DataLie)
    }
}

const AXES: [Axis; 2] = Axis::BOTH;

fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

/// `S_k` of `term` at pixel `k`.
pub(crate) fn eval_group<'a>(term: Term, ctx: &Ctx<'a>, k: usize, grad: bool) -> Result<Group<'a>> {
    let m = ctx.m();
    let grid = ctx.f.grid();
    let mut g = Group::new(m, grad);
    match term {
        Term::Data(i) => g.dist_sq(ctx.p(i, k), (Slot::Const, k, ctx.f.point(k)))?,
        Term::DataMidpoint => {
            let (v, w) = (ctx.p(0, k), ctx.p(1, k));
            let c = crate::differences::midpoint(m, v.2, w.2)?;
            let f = ctx.f.point(k);
            if grad {
                let l = m.log(&c, f)?;
                g.s += m.inner(&c, &l, &l);
                g.pull_midpoint(v, w, &scale(&l, -2.0))?;
            } else {
                g.s += m.dist(&c, f).powi(2);
            }
        }
        Term::DataLie => {
            let lg = lie_group(m)?;
            let word = [Letter::plain(ctx.p(0, k).2), Letter::plain(ctx.p(1, k).2), Letter::inv(ctx.f.point(k))];
            g.word_sq(lg, &word, &[Some((Slot::Img(0), k)), Some((Slot::Img(1), k)), None])?;
        }
        Term::Tv(i) => {
            for axis in AXES {
                if let Some(j) = grid.step(k, axis, 1) {
                    g.dist_sq(ctx.p(i, k), ctx.p(i, j))?;
                }
            }
        }
        Term::Tv2Int(i) => {
            for axis in AXES {
                if let Some([a, b, c]) = second_stencil(&grid, k, axis) {
                    g.d2_sq(ctx.p(i, a), ctx.p(i, b), ctx.p(i, c))?;
                }
            }
            for axis in AXES {
                if let Some([a, b, c, d]) = mixed_stencil(&grid, k, axis) {
                    g.d11_sq(ctx.p(i, a), ctx.p(i, b), ctx.p(i, c), ctx.p(i, d))?;
                }
            }
        }
        Term::Tv2Lie(i) => {
            let lg = lie_group(m)?;
            let img = ctx.images[i];
            for axis in AXES {
                if let Some(word) = lie_second_word(img, k, axis) {
                    let [a, b, c] = second_stencil(&grid, k, axis).unwrap();
                    let refs = [c, b, a, b].map(|p| Some((Slot::Img(i), p)));
                    g.word_sq(lg, &word, &refs)?;
                }
            }
            for axis in AXES {
                if let Some(word) = lie_mixed_word(img, k, axis) {
                    let [a, b, c, d] = mixed_stencil(&grid, k, axis).unwrap();
                    let refs = [d, a, b, c].map(|p| Some((Slot::Img(i), p)));
                    g.word_sq(lg, &word, &refs)?;
                }
            }
        }
        Term::TgvFirst => {
            let s = ctx.xi.unwrap().components();
            for axis in AXES.iter().take(s) {
                let c = axis_index(*axis);
                let nb = grid.step(k, *axis, 1).map(|j| ctx.p(0, j));
                g.residual_sq(ctx.p(0, k), nb, ctx.x(c, k))?;
            }
        }
        Term::TgvSecond => {
            let s = ctx.xi.unwrap().components();
            for c in 0..s {
                for axis in AXES {
                    if grid.interior(k, axis) {
                        let j = grid.step(k, axis, -1).unwrap();
                        g.ladder_sq(ctx.p(0, j), ctx.p(0, k), ctx.x(c, j), ctx.x(c, k))?;
                    }
                }
            }
        }
        Term::LieTgvFirst(s) => {
            let lg = lie_group(m)?;
            for axis in AXES.iter().take(s) {
                let c = axis_index(*axis);
                let a = ctx.p(1 + c, k);
                match grid.step(k, *axis, 1) {
                    Some(j) => {
                        let word = [Letter::inv(a.2), Letter::plain(ctx.p(0, j).2), Letter::inv(ctx.p(0, k).2)];
                        let refs = [Some((a.0, k)), Some((Slot::Img(0), j)), Some((Slot::Img(0), k))];
                        g.word_sq(lg, &word, &refs)?;
                    }
                    None => g.word_sq(lg, &[Letter::plain(a.2)], &[Some((a.0, k))])?,
                }
            }
        }
        Term::LieTgvSecond(s) => {
            let lg = lie_group(m)?;
            for c in 0..s {
                for axis in AXES {
                    if grid.interior(k, axis) {
                        let j = grid.step(k, axis, -1).unwrap();
                        let (ak, aj) = (ctx.p(1 + c, k), ctx.p(1 + c, j));
                        let word = [Letter::plain(ak.2), Letter::inv(aj.2)];
                        g.word_sq(lg, &word, &[Some((ak.0, k)), Some((aj.0, j))])?;
                    }
                }
            }
        }
    }
    Ok(g)
}

/// How per-pixel sums enter the square roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Grouping {
    /// `Σ_i sqrt(S_i + ε²)`.
    #[default]
    PerPixel,
    /// `sqrt(Σ_i S_i + ε²)`.
    Global,
}

/// Value of a term: `½ Σ S_i` for data terms, the smoothed root sum otherwise.
pub(crate) fn term_value(term: Term, ctx: &Ctx<'_>, eps: f64, grouping: Grouping) -> Result<f64> {
    let s = map_indexed(ctx.f.len(), |k| Ok(eval_group(term, ctx, k, false).map_err(|e| e.at_pixel(k))?.s))?;
    Ok(reduce(term, &s, eps, grouping))
}

fn reduce(term: Term, s: &[f64], eps: f64, grouping: Grouping) -> f64 {
    if term.is_data() {
        return 0.5 * s.iter().sum::<f64>();
    }
    match grouping {
        Grouping::PerPixel => s.iter().map(|v| (v + eps * eps).sqrt()).sum(),
        Grouping::Global => (s.iter().sum::<f64>() + eps * eps).sqrt(),
    }
}

/// Gradient buffers, one per image slot plus the tangent field.
#[derive(Clone, Debug)]
pub(crate) struct Accum {
    pub images: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub len: usize,
    pub s: usize,
}

impl Accum {
    pub fn new(n_images: usize, pixels: usize, len: usize, s: usize) -> Self {
        Accum { images: vec![vec![0.0; pixels * len]; n_images], xi: vec![0.0; pixels * s * len], len, s }
    }

    fn add(&mut self, c: &Contrib, w: f64) {
        let l = self.len;
        match c.slot {
            Slot::Const => {}
            Slot::Img(i) => axpy(&mut self.images[i][c.pixel * l..(c.pixel + 1) * l], w, &c.vec),
            Slot::Xi(comp) => {
                let o = (c.pixel * self.s + comp) * l;
                axpy(&mut self.xi[o..o + l], w, &c.vec)
            }
        }
    }
}

/// Adds `weight · grad(term)` to `acc` and returns the term value.
pub(crate) fn term_gradient(
    term: Term,
    ctx: &Ctx<'_>,
    eps: f64,
    grouping: Grouping,
    weight: f64,
    acc: &mut Accum,
) -> Result<f64> {
    let groups = map_indexed(ctx.f.len(), |k| {
        let g = eval_group(term, ctx, k, true).map_err(|e| e.at_pixel(k))?;
        Ok((g.s, g.contribs))
    })?;
    let s: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let value = reduce(term, &s, eps, grouping);
    let global = (s.iter().sum::<f64>() + eps * eps).sqrt();
    for (sk, contribs) in &groups {
        let factor = if term.is_data() {
            0.5
        } else {
            match grouping {
                Grouping::PerPixel => 0.5 / (sk + eps * eps).sqrt(),
                Grouping::Global => 0.5 / global,
            }
        };
        if !factor.is_finite() {
            continue;
        }
        for c in contribs {
            acc.add(c, weight * factor);
        }
    }
    Ok(value)
}
