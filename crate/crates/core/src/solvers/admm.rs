//! ADMM for the Euclidean models on embedded data with a manifold constraint.
//!
//! The splitting is `z = A x` with `ι_M(z)`, where `A x` is the
//! reconstruction of the model variables. Each outer iteration runs a
//! warm-started primal-dual loop on the convex part, projects onto the
//! manifold and updates the scaled multiplier.

use crate::energies::{ModelConfig, ModelKind};
use crate::error::{Error, Result};
use crate::euclid::{EuclidModel, VecImage};
use crate::image::ManifoldImage;
use crate::linalg::{dot, norm, sub};
use crate::manifold::Manifold;

use super::descent::{Progress, ProgressEvent, StopReason};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmmParams {
    /// Penalty of the augmented Lagrangian.
    pub penalty: f64,
    pub max_iter: usize,
    /// Primal-dual iterations per convex subproblem.
    pub inner_iter: usize,
    /// Root-mean-square residual tolerances.
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Use `∇̃_S` instead of `∇̃` in the TGV model.
    pub symmetric_tgv: bool,
    /// Allow SPD data, projected by eigenvalue clipping.
    pub allow_spd: bool,
}

impl Default for AdmmParams {
    fn default() -> Self {
        AdmmParams {
            penalty: 1.0,
            max_iter: 300,
            inner_iter: 200,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            symmetric_tgv: false,
            allow_spd: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdmmReport {
    /// Model variables of the best feasible iterate, in embedding coordinates.
    pub components: Vec<VecImage>,
    /// Projected reconstruction of the best feasible iterate.
    pub reconstruction: ManifoldImage,
    pub iterations: usize,
    /// Objective at the feasible point of each outer iteration.
    pub feasible_trace: Vec<f64>,
    /// Running minimum of `feasible_trace`.
    pub best_trace: Vec<f64>,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    /// Largest distance of any projected iterate from its own re-projection.
    pub max_membership_error: f64,
    pub stop_reason: StopReason,
}

/// Projects embedding coordinates and re-embeds. Quaternion signs follow
/// the raw vector so neighbouring pixels stay on one sheet.
fn project_embedded(m: &dyn Manifold, raw: &[f64]) -> Result<(Vec<f64>, f64)> {
    let p = m.project_embedded(raw)?;
    let mut e = m.embed(&p);
    if m.name() == "so3" && dot(&e, raw) < 0.0 {
        e.iter_mut().for_each(|c| *c = -*c);
    }
    let again = m.embed(&m.project_embedded(&e)?);
    let err = norm(&sub(&again, &e)).min(norm(&sub(&again.iter().map(|c| -c).collect::<Vec<_>>(), &e)));
    Ok((e, err))
}

/// Embeds `f`; quaternions are flipped to agree with their left (or upper) neighbour.
pub fn embed_aligned(f: &ManifoldImage) -> VecImage {
    let mut out = VecImage::embed(f);
    if f.manifold().name() == "so3" {
        let grid = f.grid();
        for k in 0..grid.len() {
            let prev = grid.step(k, crate::Axis::X, -1).or_else(|| grid.step(k, crate::Axis::Y, -1));
            if let Some(j) = prev {
                if dot(out.pixel(j), out.pixel(k)) < 0.0 {
                    out.pixel_mut(k).iter_mut().for_each(|c| *c = -*c);
                }
            }
        }
    }
    out
}

/// Feasible variables: the last data slot absorbs `z − A x`.
fn feasible(model: &EuclidModel, x: &[VecImage], z: &VecImage) -> Vec<VecImage> {
    let mut y = x.to_vec();
    let (slot, c) = *model.data.parts.last().unwrap();
    let mut r = z.clone();
    r.axpy(-1.0, &model.data.apply(x));
    y[slot].axpy(1.0 / c, &r);
    y
}

fn project_balls(y: &mut [Vec<VecImage>], radii: &[f64]) {
    for (blocks, &rad) in y.iter_mut().zip(radii) {
        let n = blocks[0].grid().len();
        for k in 0..n {
            let s: f64 = blocks.iter().map(|b| b.pixel(k).iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
            if s > rad {
                let f = if s > 0.0 { rad / s } else { 0.0 };
                for b in blocks.iter_mut() {
                    b.pixel_mut(k).iter_mut().for_each(|v| *v *= f);
                }
            }
        }
    }
}

/// Extrinsic ADMM for `ext_ic`, `ext_tgv` and `ext_additive`.
pub fn admm_extrinsic(
    cfg: &ModelConfig,
    f: &ManifoldImage,
    params: &AdmmParams,
    mut progress: Option<Progress<'_>>,
) -> Result<AdmmReport> {
    cfg.validate()?;
    if !cfg.model.is_extrinsic() {
        return Err(Error::InvalidParameter(format!("{} is not an extrinsic model", cfg.model)));
    }
    let m = f.manifold();
    if m.name().starts_with("spd") && !params.allow_spd {
        return Err(Error::InvalidParameter("extrinsic SPD models need allow_spd".into()));
    }
    if !(params.penalty > 0.0) {
        return Err(Error::InvalidParameter(format!("penalty = {}", params.penalty)));
    }
    let grid = f.grid();
    let model = EuclidModel::for_kind(cfg.model, grid, cfg.beta, params.symmetric_tgv && cfg.model == ModelKind::ExtTgv)?;
    let fe = embed_aligned(f);
    let dim = fe.dim();
    let n = grid.len();
    let rho = params.penalty;
    let alpha = cfg.alpha;
    let kappa = model.data.gram();
    let radii: Vec<f64> = model.terms.iter().map(|t| alpha * t.weight).collect();
    let lk = model.k_norm(grid, dim).max(1e-12);
    let (tau, sigma) = (0.99 / lk, 0.99 / lk);

    let mut x = model.initial(&fe);
    let mut y: Vec<Vec<VecImage>> = model.apply_k(&x).into_iter().map(|b| b.iter().map(|v| VecImage::zeros(grid, v.dim())).collect()).collect();
    let mut z = fe.clone();
    let mut lam = VecImage::zeros(grid, dim);

    let mut report = AdmmReport {
        components: x.clone(),
        reconstruction: f.clone(),
        iterations: 0,
        feasible_trace: Vec::new(),
        best_trace: Vec::new(),
        primal_residuals: Vec::new(),
        dual_residuals: Vec::new(),
        max_membership_error: 0.0,
        stop_reason: StopReason::MaxIter,
    };
    let mut best = f64::INFINITY;
    let mut best_z = z.clone();

    for it in 1..=params.max_iter {
        // Convex block: ½‖Ax − f‖² + ρ/2 ‖Ax − (z − λ)‖² + α Σ w ‖K x‖.
        let mut c = z.clone();
        c.axpy(-1.0, &lam);
        let mut cc = fe.clone();
        cc.axpy(rho, &c);
        cc.data_mut().iter_mut().for_each(|v| *v /= 1.0 + rho);
        let mut x_bar = x.clone();
        for _ in 0..params.inner_iter {
            let kx = model.apply_k(&x_bar);
            for (yt, kt) in y.iter_mut().zip(&kx) {
                for (yb, kb) in yt.iter_mut().zip(kt) {
                    yb.axpy(sigma, kb);
                }
            }
            project_balls(&mut y, &radii);
            let mut x_new = x.clone();
            let mut kty = vec![VecImage::zeros(grid, dim); model.slots];
            model.adjoint_k(&y, &mut kty);
            for (a, b) in x_new.iter_mut().zip(&kty) {
                a.axpy(-tau, b);
            }
            let mut r = model.data.apply(&x_new);
            r.axpy(-1.0, &cc);
            r.data_mut().iter_mut().for_each(|v| *v /= 1.0 + tau * (1.0 + rho) * kappa);
            model.data.adjoint_into(&r, -tau * (1.0 + rho), &mut x_new);
            x_bar = x_new.clone();
            for (xb, xo) in x_bar.iter_mut().zip(&x) {
                xb.data_mut().iter_mut().zip(xo.data()).for_each(|(a, b)| *a = 2.0 * *a - b);
            }
            x = x_new;
        }

        // Projection and multiplier.
        let ax = model.reconstruction(&x);
        let mut raw = ax.clone();
        raw.axpy(1.0, &lam);
        let z_prev = z.clone();
        for k in 0..n {
            let (p, err) = project_embedded(m, raw.pixel(k)).map_err(|e| e.at_pixel(k))?;
            report.max_membership_error = report.max_membership_error.max(err);
            z.pixel_mut(k).copy_from_slice(&p);
        }
        let mut prim = ax.clone();
        prim.axpy(-1.0, &z);
        lam.axpy(1.0, &prim);
        let mut dz = z.clone();
        dz.axpy(-1.0, &z_prev);
        let rp = (prim.norm_sq() / n as f64).sqrt();
        let rd = rho * (dz.norm_sq() / n as f64).sqrt();

        let xf = feasible(&model, &x, &z);
        let obj = model.energy(&xf, &fe, alpha, cfg.epsilon)?.total;
        if obj < best {
            best = obj;
            best_z = z.clone();
            report.components = xf;
        }
        report.feasible_trace.push(obj);
        report.best_trace.push(best);
        report.primal_residuals.push(rp);
        report.dual_residuals.push(rd);
        report.iterations = it;
        if let Some(cb) = progress.as_mut() {
            cb(&ProgressEvent { iter: it, energy: best, max_change: rd / rho });
        }
        if rp < params.tol_primal && rd < params.tol_dual {
            report.stop_reason = StopReason::MaxChange;
            break;
        }
    }

    let pts = (0..n).map(|k| m.project_embedded(best_z.pixel(k))).collect::<Result<Vec<_>>>()?;
    report.reconstruction = ManifoldImage::from_points(grid, f.manifold_arc(), &pts)?;
    Ok(report)
}
