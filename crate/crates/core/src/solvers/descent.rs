//! Armijo gradient descent on product manifolds.

use crate::energies::{energy, ModelConfig, ModelKind, ModelState};
use crate::error::{Error, Result};
use crate::euclid::{EuclidModel, VecImage};
use crate::gradients::{energy_and_gradient, exp_state, GradientBundle};
use crate::image::{ManifoldImage, PixelGrid, TangentField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentParams {
    /// Initial step size.
    pub sigma: f64,
    /// Backtracking factor.
    pub rho: f64,
    /// Armijo constant.
    pub c: f64,
    /// Stop once the largest per-pixel movement drops below this.
    pub delta_stop: f64,
    pub max_iter: usize,
    /// Start each line search at `min(σ, t_prev / ρ)` instead of `σ`.
    pub warm_start: bool,
}

impl DescentParams {
    /// Defaults for signals (`n2 = 1`) or images.
    pub fn for_grid(grid: PixelGrid) -> Self {
        let signal = grid.n2 == 1;
        DescentParams {
            sigma: 1.0,
            rho: 0.5,
            c: 1e-4,
            delta_stop: if signal { 1e-10 } else { 1e-8 },
            max_iter: if signal { 1_000_000 } else { 100_000 },
            warm_start: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParameter(s));
        if !(self.sigma > 0.0) {
            return bad(format!("sigma = {}", self.sigma));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho = {} outside (0, 1)", self.rho));
        }
        if !(self.c > 0.0) {
            return bad(format!("c = {}", self.c));
        }
        Ok(())
    }
}

/// Backtracking steps tried before giving up.
pub const MAX_BACKTRACK: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxChange,
    MaxIter,
    /// No step `σρˡ` with `l ≤ 60` satisfied the Armijo condition; the last
    /// iterate is kept.
    LineSearchStall,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::MaxChange => "max_change",
            StopReason::MaxIter => "max_iter",
            StopReason::LineSearchStall => "line_search_stall",
        }
    }
}

/// One accepted step, enough to re-check the Armijo inequality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub energy_before: f64,
    pub energy_after: f64,
    pub step: f64,
    pub backtracks: u32,
    pub grad_norm_sq: f64,
}

impl StepRecord {
    /// `E(new) ≤ E(old) − c t ‖grad‖²`.
    pub fn satisfies_armijo(&self, c: f64) -> bool {
        self.energy_after <= self.energy_before - c * self.step * self.grad_norm_sq
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProgressEvent {
    pub iter: usize,
    pub energy: f64,
    pub max_change: f64,
}

pub type Progress<'a> = &'a mut dyn FnMut(&ProgressEvent);

#[derive(Clone, Debug)]
pub struct SolverReport<S> {
    pub final_state: S,
    pub iterations: usize,
    pub initial_energy: f64,
    /// One value per accepted step.
    pub energy_trace: Vec<f64>,
    pub stop_reason: StopReason,
    /// Largest per-pixel movement of each accepted step.
    pub max_changes: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

impl<S> SolverReport<S> {
    pub fn final_energy(&self) -> f64 {
        self.energy_trace.last().copied().unwrap_or(self.initial_energy)
    }

    pub fn is_monotone(&self) -> bool {
        let mut prev = self.initial_energy;
        self.energy_trace.iter().all(|&e| {
            let ok = e <= prev;
            prev = e;
            ok
        })
    }
}

/// A smooth objective on a product manifold.
pub trait DescentProblem {
    type State: Clone;
    type Dir;

    fn energy(&self, x: &Self::State) -> Result<f64>;
    fn energy_and_gradient(&self, x: &Self::State) -> Result<(f64, Self::Dir)>;
    fn norm_sq(&self, d: &Self::Dir) -> f64;
    /// Largest per-pixel norm of `d`.
    fn max_norm(&self, d: &Self::Dir) -> f64;
    /// Moves `x` by `−t d`.
    fn step(&self, x: &Self::State, d: &Self::Dir, t: f64) -> Result<Self::State>;
}

/// Algorithm core shared by all descent variants.
pub fn armijo_descent<P: DescentProblem>(
    problem: &P,
    init: P::State,
    params: &DescentParams,
    mut progress: Option<Progress<'_>>,
) -> Result<SolverReport<P::State>> {
    params.validate()?;
    let mut x = init;
    // Energies always come from `energy` so that accepted values compare exactly.
    let mut e = problem.energy(&x)?;
    let mut g = problem.energy_and_gradient(&x)?.1;
    let mut report = SolverReport {
        final_state: x.clone(),
        iterations: 0,
        initial_energy: e,
        energy_trace: Vec::new(),
        stop_reason: StopReason::MaxIter,
        max_changes: Vec::new(),
        steps: Vec::new(),
    };
    let mut t0 = params.sigma;
    while report.iterations < params.max_iter {
        let gn = problem.norm_sq(&g);
        let mut l = 0u32;
        let mut t = t0;
        let accepted = loop {
            let cand = problem.step(&x, &g, t)?;
            let ec = problem.energy(&cand)?;
            if ec <= e - params.c * t * gn {
                break Some((cand, ec));
            }
            l += 1;
            if l > MAX_BACKTRACK {
                break None;
            }
            t *= params.rho;
        };
        let Some((cand, ec)) = accepted else {
            report.stop_reason = StopReason::LineSearchStall;
            break;
        };
        report.iterations += 1;
        let change = t * problem.max_norm(&g);
        report.steps.push(StepRecord { energy_before: e, energy_after: ec, step: t, backtracks: l, grad_norm_sq: gn });
        report.energy_trace.push(ec);
        report.max_changes.push(change);
        if let Some(cb) = progress.as_mut() {
            cb(&ProgressEvent { iter: report.iterations, energy: ec, max_change: change });
        }
        x = cand;
        if params.warm_start {
            t0 = (t / params.rho).min(params.sigma);
        }
        if change < params.delta_stop {
            report.stop_reason = StopReason::MaxChange;
            break;
        }
        e = ec;
        g = problem.energy_and_gradient(&x)?.1;
    }
    report.final_state = x;
    Ok(report)
}

/// An intrinsic model with fixed data.
pub struct ModelProblem<'a> {
    pub cfg: ModelConfig,
    pub f: &'a ManifoldImage,
}

impl DescentProblem for ModelProblem<'_> {
    type State = ModelState;
    type Dir = GradientBundle;

    fn energy(&self, x: &ModelState) -> Result<f64> {
        Ok(energy(&self.cfg, x, self.f)?.total)
    }

    fn energy_and_gradient(&self, x: &ModelState) -> Result<(f64, GradientBundle)> {
        energy_and_gradient(&self.cfg, x, self.f)
    }

    fn norm_sq(&self, d: &GradientBundle) -> f64 {
        d.norm_sq()
    }

    fn max_norm(&self, d: &GradientBundle) -> f64 {
        d.max_norm()
    }

    fn step(&self, x: &ModelState, d: &GradientBundle, t: f64) -> Result<ModelState> {
        exp_state(x, d, -t)
    }
}

/// A Euclidean model, used as the flat twin of the intrinsic solvers.
pub struct EuclidProblem<'a> {
    pub model: &'a EuclidModel,
    pub f: &'a VecImage,
    pub alpha: f64,
    pub eps: f64,
}

impl DescentProblem for EuclidProblem<'_> {
    type State = Vec<VecImage>;
    type Dir = Vec<VecImage>;

    fn energy(&self, x: &Vec<VecImage>) -> Result<f64> {
        Ok(self.model.energy(x, self.f, self.alpha, self.eps)?.total)
    }

    fn energy_and_gradient(&self, x: &Vec<VecImage>) -> Result<(f64, Vec<VecImage>)> {
        self.model.energy_and_gradient(x, self.f, self.alpha, self.eps)
    }

    fn norm_sq(&self, d: &Vec<VecImage>) -> f64 {
        d.iter().map(|v| v.norm_sq()).sum()
    }

    fn max_norm(&self, d: &Vec<VecImage>) -> f64 {
        let mut best: f64 = 0.0;
        for v in d {
            for k in 0..v.grid().len() {
                best = best.max(crate::linalg::norm(v.pixel(k)));
            }
        }
        best
    }

    fn step(&self, x: &Vec<VecImage>, d: &Vec<VecImage>, t: f64) -> Result<Vec<VecImage>> {
        Ok(x.iter()
            .zip(d)
            .map(|(a, b)| {
                let mut y = a.clone();
                y.axpy(-t, b);
                y
            })
            .collect())
    }
}

fn check_smoothing(cfg: &ModelConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.epsilon <= 0.0 {
        return Err(Error::InvalidParameter("gradient descent needs epsilon > 0".into()));
    }
    Ok(())
}

/// Armijo descent for the TV, additive, IC and Lie TGV models.
pub fn gradient_descent(
    cfg: &ModelConfig,
    init: ModelState,
    f: &ManifoldImage,
    params: &DescentParams,
    progress: Option<Progress<'_>>,
) -> Result<SolverReport<ModelState>> {
    check_smoothing(cfg)?;
    match cfg.model {
        ModelKind::Tv | ModelKind::Additive | ModelKind::IcMidpoint | ModelKind::IcLie | ModelKind::TgvLie => {}
        m => return Err(Error::InvalidParameter(format!("gradient_descent does not handle {m}"))),
    }
    armijo_descent(&ModelProblem { cfg: *cfg, f }, init, params, progress)
}

/// Joint descent in `(u, ξ)` for the pole-ladder TGV model. `ξ` is moved by
/// adding its gradient step and transporting to the new base point.
pub fn gradient_descent_tangent_bundle(
    cfg: &ModelConfig,
    init_xi: TangentField,
    f: &ManifoldImage,
    params: &DescentParams,
    progress: Option<Progress<'_>>,
) -> Result<SolverReport<ModelState>> {
    check_smoothing(cfg)?;
    if cfg.model != ModelKind::TgvPole {
        return Err(Error::InvalidParameter(format!("tangent bundle descent is for tgv_pole, not {}", cfg.model)));
    }
    armijo_descent(&ModelProblem { cfg: *cfg, f }, ModelState::Tangent(init_xi), params, progress)
}

/// Plain Euclidean gradient descent with the same line search.
pub fn euclidean_descent(
    model: &EuclidModel,
    init: Vec<VecImage>,
    f: &VecImage,
    alpha: f64,
    eps: f64,
    params: &DescentParams,
) -> Result<SolverReport<Vec<VecImage>>> {
    armijo_descent(&EuclidProblem { model, f, alpha, eps }, init, params, None)
}
