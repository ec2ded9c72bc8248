mod common;

use std::sync::Arc;

use common::*;
use manivar::differences::gradient_intrinsic;
use manivar::energies::{energy, field_components, ModelConfig, ModelKind, ModelState};
use manivar::euclid::{EuclidModel, VecImage};
use manivar::manifold::Manifold;
use manivar::manifolds::{Circle, Rotations, Sphere};
use manivar::solvers::*;
use manivar::{Error, ManifoldImage, PixelGrid, TangentField};
use rand::Rng;

struct Quadratic;

impl DescentProblem for Quadratic {
    type State = f64;
    type Dir = f64;
    fn energy(&self, x: &f64) -> manivar::Result<f64> {
        Ok(0.5 * (x - 1.0).powi(2))
    }
    fn energy_and_gradient(&self, x: &f64) -> manivar::Result<(f64, f64)> {
        Ok((self.energy(x)?, x - 1.0))
    }
    fn norm_sq(&self, d: &f64) -> f64 {
        d * d
    }
    fn max_norm(&self, d: &f64) -> f64 {
        d.abs()
    }
    fn step(&self, x: &f64, d: &f64, t: f64) -> manivar::Result<f64> {
        Ok(x - t * d)
    }
}

/// Every trial step lands uphill, so no step is ever accepted.
struct Uphill;

impl DescentProblem for Uphill {
    type State = f64;
    type Dir = f64;
    fn energy(&self, x: &f64) -> manivar::Result<f64> {
        Ok(0.5 * x * x)
    }
    fn energy_and_gradient(&self, x: &f64) -> manivar::Result<(f64, f64)> {
        Ok((self.energy(x)?, -x))
    }
    fn norm_sq(&self, d: &f64) -> f64 {
        d * d
    }
    fn max_norm(&self, d: &f64) -> f64 {
        d.abs()
    }
    fn step(&self, x: &f64, _: &f64, _: f64) -> manivar::Result<f64> {
        Ok(x + 1.0)
    }
}

fn params(max_iter: usize) -> DescentParams {
    DescentParams { max_iter, delta_stop: 0.0, ..DescentParams::for_grid(PixelGrid::new(2, 2)) }
}

#[test]
fn armijo_accepts_the_full_step_on_a_quadratic() {
    let p = DescentParams { sigma: 1.0, rho: 0.5, c: 0.5, delta_stop: 1e-12, max_iter: 10, warm_start: false };
    let r = armijo_descent(&Quadratic, 0.0, &p, None).unwrap();
    assert_eq!(r.steps[0].backtracks, 0);
    assert_eq!(r.steps[0].step, 1.0);
    assert_eq!(r.energy_trace[0], 0.0);
    assert_eq!(r.final_state, 1.0);
    assert_eq!(r.stop_reason, StopReason::MaxChange);
    assert_eq!(r.iterations, 2);
}

#[test]
fn stalled_line_search_is_reported() {
    let r = armijo_descent(&Uphill, 1.0, &params(10), None).unwrap();
    assert_eq!(r.stop_reason, StopReason::LineSearchStall);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.final_state, 1.0);
}

#[test]
fn parameters_are_validated() {
    let bad = DescentParams { rho: 1.0, ..params(1) };
    assert!(armijo_descent(&Quadratic, 0.0, &bad, None).is_err());
    let f = ManifoldImage::constant(PixelGrid::signal(3), Arc::new(Circle), &[0.0]).unwrap();
    let cfg = ModelConfig::new(ModelKind::Additive, 1.0, 0.5, 0.0);
    assert!(matches!(gradient_descent(&cfg, ModelState::Image(f.clone()), &f, &params(1), None), Err(Error::InvalidParameter(_))));
    let cfg = ModelConfig::new(ModelKind::TgvPole, 1.0, 0.5, 1e-3);
    assert!(gradient_descent(&cfg, ModelState::Image(f.clone()), &f, &params(1), None).is_err());
}

#[test]
fn minimizer_stops_at_the_first_iteration() {
    let m: Arc<dyn Manifold> = Arc::new(Sphere::new(2));
    let f = ManifoldImage::constant(PixelGrid::new(3, 3), m, &[0.0, 0.6, 0.8]).unwrap();
    let cfg = ModelConfig::new(ModelKind::Additive, 1.0, 0.5, 1e-3);
    let p = DescentParams::for_grid(f.grid());
    let r = gradient_descent(&cfg, ModelState::Image(f.clone()), &f, &p, None).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.stop_reason, StopReason::MaxChange);
    assert!(*r.max_changes.last().unwrap() < p.delta_stop);
}

#[test]
fn geodesic_signal_with_matching_field_is_stationary() {
    let m: Arc<dyn Manifold> = Arc::new(Sphere::new(2));
    let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![(0.15 * i as f64).cos(), (0.15 * i as f64).sin(), 0.0]).collect();
    let u = ManifoldImage::from_points(PixelGrid::signal(10), m, &pts).unwrap();
    let g = gradient_intrinsic(&u).unwrap();
    let xi = TangentField::new(u.clone(), 1, (0..10).flat_map(|k| g.vector(k, 0).to_vec()).collect()).unwrap();
    let cfg = ModelConfig::new(ModelKind::TgvPole, 1.0, 0.5, 1e-3);
    let r = gradient_descent_tangent_bundle(&cfg, xi, &u, &DescentParams::for_grid(u.grid()), None).unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.stop_reason, StopReason::MaxChange);
    assert!(r.max_changes[0] < 1e-12);
}

#[test]
fn every_model_descends_monotonically_with_valid_armijo_steps() {
    let mut r = rng(30);
    let cases: Vec<(ModelKind, Arc<dyn Manifold>)> = vec![
        (ModelKind::Tv, Arc::new(Sphere::new(2))),
        (ModelKind::Additive, Arc::new(Sphere::new(2))),
        (ModelKind::IcMidpoint, Arc::new(Sphere::new(2))),
        (ModelKind::TgvPole, Arc::new(Sphere::new(2))),
        (ModelKind::IcLie, Arc::new(Rotations)),
        (ModelKind::TgvLie, Arc::new(Rotations)),
    ];
    for (model, m) in cases {
        let c = m.random_point(&mut r);
        let pts: Vec<Vec<f64>> = (0..20).map(|_| point_at(m.as_ref(), &c, r.random_range(0.0..0.5), &mut r)).collect();
        let f = ManifoldImage::from_points(PixelGrid::new(5, 4), m.clone(), &pts).unwrap();
        let cfg = ModelConfig::new(model, 0.5, 0.4, 1e-2);
        let init = initial_state(&cfg, &f).unwrap();
        let e0 = energy(&cfg, &init, &f).unwrap().total;
        let p = params(40);
        let rep = match model {
            ModelKind::TgvPole => {
                let ModelState::Tangent(xi) = init else { unreachable!() };
                gradient_descent_tangent_bundle(&cfg, xi, &f, &p, None).unwrap()
            }
            _ => gradient_descent(&cfg, init, &f, &p, None).unwrap(),
        };
        assert_eq!(rep.initial_energy, e0);
        assert!(rep.is_monotone(), "{model}");
        assert!(rep.steps.iter().all(|s| s.satisfies_armijo(p.c)), "{model}");
        assert!(rep.final_energy() < e0, "{model}");
        let recheck = energy(&cfg, &rep.final_state, &f).unwrap().total;
        assert_eq!(recheck, rep.final_energy(), "{model}");
    }
}

#[test]
fn progress_callback_sees_every_step() {
    let f = ManifoldImage::new(PixelGrid::signal(8), Arc::new(Circle), (0..8).map(|i| 0.1 * (i % 3) as f64).collect()).unwrap();
    let cfg = ModelConfig::new(ModelKind::Tv, 0.3, 1.0, 1e-2);
    let mut seen = Vec::new();
    let mut cb = |e: &ProgressEvent| seen.push(e.iter);
    let rep = gradient_descent(&cfg, ModelState::Image(f.clone()), &f, &params(12), Some(&mut cb)).unwrap();
    assert_eq!(seen, (1..=rep.iterations).collect::<Vec<_>>());
}

#[test]
fn runs_are_deterministic() {
    let mut r = rng(31);
    let m: Arc<dyn Manifold> = Arc::new(Rotations);
    let c = m.random_point(&mut r);
    let pts: Vec<Vec<f64>> = (0..16).map(|_| point_at(m.as_ref(), &c, r.random_range(0.0..0.5), &mut r)).collect();
    let f = ManifoldImage::from_points(PixelGrid::new(4, 4), m, &pts).unwrap();
    let cfg = ModelConfig::new(ModelKind::TgvPole, 0.5, 0.4, 1e-2);
    let run = || {
        let ModelState::Tangent(xi) = initial_state(&cfg, &f).unwrap() else { unreachable!() };
        gradient_descent_tangent_bundle(&cfg, xi, &f, &params(15), None).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.energy_trace, b.energy_trace);
    assert_eq!(a.final_state.xi().unwrap().data(), b.final_state.xi().unwrap().data());
}

#[test]
fn karcher_means() {
    let pi = std::f64::consts::PI;
    let pts: Vec<Vec<f64>> = (0..4).map(|i| vec![0.3 * (0.5 * pi * i as f64).cos(), 0.3 * (0.5 * pi * i as f64).sin(), 0.9]).collect();
    let pts: Vec<Vec<f64>> = pts.iter().map(|p| manivar::linalg::scale(p, 1.0 / manivar::linalg::norm(p))).collect();
    let mean = karcher_mean(&Sphere::new(2), pts.iter().map(|p| p.as_slice())).unwrap();
    assert!(manivar::linalg::max_abs_diff(&mean, &[0.0, 0.0, 1.0]) < 1e-10);
    let angles = [[0.1], [0.3], [-0.05]];
    let mean = karcher_mean(&Circle, angles.iter().map(|a| a.as_slice())).unwrap();
    assert!((mean[0] - 0.35 / 3.0).abs() < 1e-12);
}

#[test]
fn initial_states() {
    let f = ManifoldImage::new(PixelGrid::signal(5), Arc::new(Circle), vec![0.0, 0.1, 0.3, 0.2, 0.2]).unwrap();
    let st = initial_state(&ModelConfig::new(ModelKind::TgvPole, 1.0, 0.5, 1e-3), &f).unwrap();
    assert_eq!(st.xi().unwrap().components(), field_components(f.grid()));
    let st = initial_state(&ModelConfig::new(ModelKind::IcMidpoint, 1.0, 0.5, 1e-3), &f).unwrap();
    let ModelState::Pair { w, .. } = st else { panic!() };
    assert!((w.point(3)[0] - 0.16).abs() < 1e-10);
    let st = initial_state(&ModelConfig::new(ModelKind::TgvLie, 1.0, 0.5, 1e-3), &f).unwrap();
    let ModelState::LieTgv { a, .. } = st else { panic!() };
    assert_eq!(a.len(), 1);
    assert!((a[0].point(1)[0] - 0.2).abs() < 1e-15);
    assert!(initial_state(&ModelConfig::new(ModelKind::ExtIc, 1.0, 0.5, 1e-3), &f).is_err());
}

/// Intrinsic descent on flat S¹ data against the Euclidean twin, iterate by iterate.
#[test]
fn flat_limit_descent_matches_euclidean_twin() {
    let mut r = rng(32);
    let grid = PixelGrid::new(5, 4);
    let n = grid.len();
    let angles: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.1)).collect();
    let f = ManifoldImage::new(grid, Arc::new(Circle), angles).unwrap();
    let fv = VecImage::from_coords(&f);
    let (alpha, beta, eps) = (0.05, 0.4, 1e-2);
    let p = params(50);

    let mut additive = EuclidModel::additive(grid, beta);
    additive.terms[1].weight = 0.5 * (1.0 - beta);
    additive.terms[1].eps_scale = 2.0;
    let mut ic = EuclidModel::ic(grid, beta);
    ic.data.parts = vec![(0, 0.5), (1, 0.5)];
    ic.terms[1].weight = 0.5 * (1.0 - beta);
    ic.terms[1].eps_scale = 2.0;
    let tgv = EuclidModel::tgv(grid, beta, false);

    for (model, euc) in [(ModelKind::Additive, additive), (ModelKind::IcMidpoint, ic), (ModelKind::TgvPole, tgv)] {
        let cfg = ModelConfig::new(model, alpha, beta, eps);
        let init = initial_state(&cfg, &f).unwrap();
        let x0: Vec<VecImage> = match &init {
            ModelState::Image(u) => vec![VecImage::from_coords(u)],
            ModelState::Pair { v, w } => vec![VecImage::from_coords(v), VecImage::from_coords(w)],
            ModelState::Tangent(xi) => {
                let mut x = vec![VecImage::from_coords(xi.base())];
                for c in 0..xi.components() {
                    x.push(VecImage::new(grid, 1, (0..n).map(|k| xi.vector(k, c)[0]).collect()).unwrap());
                }
                x
            }
            _ => unreachable!(),
        };
        let mut worst: f64 = 0.0;
        let mut a_state = init;
        let mut b_state = x0;
        let single = DescentParams { max_iter: 1, ..p };
        for _ in 0..50 {
            let a = match a_state {
                ModelState::Tangent(xi) => gradient_descent_tangent_bundle(&cfg, xi, &f, &single, None).unwrap(),
                st => gradient_descent(&cfg, st, &f, &single, None).unwrap(),
            };
            let b = euclidean_descent(&euc, b_state, &fv, alpha, eps, &single).unwrap();
            assert_eq!(a.steps[0].step, b.steps[0].step, "{model}");
            a_state = a.final_state;
            b_state = b.final_state;
            let flat: Vec<f64> = match &a_state {
                ModelState::Tangent(xi) => {
                    let mut v = xi.base().data().to_vec();
                    for c in 0..xi.components() {
                        v.extend((0..n).map(|k| xi.vector(k, c)[0]));
                    }
                    v
                }
                st => st.images().iter().flat_map(|i| i.data().to_vec()).collect(),
            };
            let other: Vec<f64> = b_state.iter().flat_map(|v| v.data().to_vec()).collect();
            worst = worst.max(manivar::linalg::max_abs_diff(&flat, &other));
        }
        assert!(worst < 1e-8, "{model}: {worst:e}");
    }
}

#[test]
fn admm_returns_data_without_prior() {
    let mut r = rng(33);
    let m: Arc<dyn Manifold> = Arc::new(Sphere::new(2));
    let c = m.random_point(&mut r);
    let pts: Vec<Vec<f64>> = (0..12).map(|_| point_at(m.as_ref(), &c, 0.4, &mut r)).collect();
    let f = ManifoldImage::from_points(PixelGrid::new(4, 3), m, &pts).unwrap();
    for model in [ModelKind::ExtIc, ModelKind::ExtTgv, ModelKind::ExtAdditive] {
        let cfg = ModelConfig::new(model, 0.0, 0.5, 0.0);
        let rep = admm_extrinsic(&cfg, &f, &AdmmParams { max_iter: 5, ..Default::default() }, None).unwrap();
        assert!(manivar::linalg::max_abs_diff(rep.reconstruction.data(), f.data()) < 1e-12, "{model}");
    }
}

#[test]
fn admm_stays_feasible_and_improves() {
    let mut r = rng(34);
    for m in [Arc::new(Circle) as Arc<dyn Manifold>, Arc::new(Sphere::new(2)), Arc::new(Rotations)] {
        let c = m.random_point(&mut r);
        let pts: Vec<Vec<f64>> = (0..30).map(|i| point_at(m.as_ref(), &c, 0.05 * (i / 10) as f64 + r.random_range(0.0..0.1), &mut r)).collect();
        let f = ManifoldImage::from_points(PixelGrid::signal(30), m.clone(), &pts).unwrap();
        for model in [ModelKind::ExtIc, ModelKind::ExtTgv] {
            let cfg = ModelConfig::new(model, 0.2, 0.5, 0.0);
            let rep = admm_extrinsic(&cfg, &f, &AdmmParams { max_iter: 40, ..Default::default() }, None).unwrap();
            assert!(rep.max_membership_error <= 1e-10, "{} {model}", m.name());
            assert!(rep.best_trace.windows(2).all(|w| w[1] <= w[0]));
            for k in 0..f.len() {
                m.check_point(rep.reconstruction.point(k), 1e-10).unwrap();
            }
            let model_e = EuclidModel::for_kind(model, f.grid(), 0.5, false).unwrap();
            let fe = manivar::solvers::admm::embed_aligned(&f);
            let e0 = model_e.energy(&model_e.initial(&fe), &fe, 0.2, 0.0).unwrap().total;
            assert!(*rep.best_trace.last().unwrap() < e0, "{} {model}", m.name());
        }
    }
}

#[test]
fn admm_rejects_spd_unless_allowed() {
    let m: Arc<dyn Manifold> = Arc::new(manivar::manifolds::Spd::new(2));
    let f = ManifoldImage::constant(PixelGrid::signal(4), m, &[1.0, 0.0, 1.0]).unwrap();
    let cfg = ModelConfig::new(ModelKind::ExtTgv, 0.5, 0.5, 0.0);
    assert!(admm_extrinsic(&cfg, &f, &AdmmParams::default(), None).is_err());
    let p = AdmmParams { allow_spd: true, max_iter: 3, ..Default::default() };
    assert!(admm_extrinsic(&cfg, &f, &p, None).is_ok());
    let cfg = ModelConfig::new(ModelKind::Additive, 0.5, 0.5, 0.0);
    assert!(admm_extrinsic(&cfg, &f, &p, None).is_err());
}
