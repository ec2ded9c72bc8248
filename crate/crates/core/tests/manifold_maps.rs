mod common;

use common::*;
use manivar::linalg::{add, scale, sub};
use manivar::manifold::{adjoint_diff_map, diff_map, jacobi_frame, DiffKind, Differential, Manifold};
use manivar::manifolds::{Circle, Rotations, Spd, Sphere};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

/// Central finite difference of each differential kind, expressed in the
/// output tangent space.
fn fd_diff(m: &dyn Manifold, kind: DiffKind, x: &[f64], arg: &[f64], tau: f64, eta: &[f64], h: f64) -> Vec<f64> {
    let eval = |s: f64| -> Vec<f64> {
        match kind {
            DiffKind::ExpInTangent => m.exp(x, &add(arg, &scale(eta, s))),
            _ => {
                let xs = m.exp(x, &scale(eta, s));
                match kind {
                    DiffKind::ExpInPoint => {
                        let u = m.parallel_transport(x, &xs, arg).unwrap();
                        m.exp(&xs, &u)
                    }
                    DiffKind::LogInBase => {
                        let l = m.log(&xs, arg).unwrap();
                        m.parallel_transport(&xs, x, &l).unwrap()
                    }
                    DiffKind::LogInArgument => m.log(arg, &xs).unwrap(),
                    DiffKind::GeodesicInX => m.geodesic(&xs, arg, tau).unwrap(),
                    DiffKind::GeodesicInY => m.geodesic(arg, &xs, tau).unwrap(),
                    DiffKind::ExpInTangent => unreachable!(),
                }
            }
        }
    };
    let (fp, fm) = (eval(h), eval(-h));
    match kind {
        DiffKind::LogInBase | DiffKind::LogInArgument => scale(&sub(&fp, &fm), 0.5 / h),
        _ => {
            let f0 = eval(0.0);
            scale(&sub(&m.log(&f0, &fp).unwrap(), &m.log(&f0, &fm).unwrap()), 0.5 / h)
        }
    }
}

fn arg_for(kind: DiffKind, m: &dyn Manifold, x: &[f64], r: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    match kind {
        DiffKind::ExpInPoint | DiffKind::ExpInTangent => tangent_of_norm(m, x, r, rng),
        _ => point_at(m, x, r, rng),
    }
}

fn output_base(kind: DiffKind, m: &dyn Manifold, x: &[f64], arg: &[f64], tau: f64) -> Vec<f64> {
    match kind {
        DiffKind::LogInBase => x.to_vec(),
        DiffKind::LogInArgument => arg.to_vec(),
        _ => Differential::new(m, kind, x, arg, tau).unwrap().end_point().to_vec(),
    }
}

#[test]
fn differentials_match_finite_differences() {
    let mut r = rng(11);
    for m in all_manifolds() {
        let m = m.as_ref();
        for kind in DiffKind::ALL {
            for trial in 0..40 {
                let x = m.random_point(&mut r);
                let d = r.random_range(0.05..1.2);
                let arg = arg_for(kind, m, &x, d, &mut r);
                let tau = [0.5, 2.0, 0.3, -0.4][trial % 4];
                let eta = tangent_of_norm(m, &x, 1.0, &mut r);
                let got = diff_map(m, kind, &x, &arg, tau, &eta).unwrap();
                let want = fd_diff(m, kind, &x, &arg, tau, &eta, 1e-5);
                let e = rel_err(&got, &want, 1e-3);
                assert!(e < 1e-5, "{} {:?}: rel err {e:e}", m.name(), kind);
            }
        }
    }
}

#[test]
fn adjoint_identity() {
    let mut r = rng(12);
    for m in all_manifolds() {
        let m = m.as_ref();
        for kind in DiffKind::ALL {
            for trial in 0..1000 {
                let x = m.random_point(&mut r);
                let arg = arg_for(kind, m, &x, r.random_range(0.0..1.2), &mut r);
                let tau = [0.5, 2.0, 0.3][trial % 3];
                let xi = tangent_of_norm(m, &x, 1.0, &mut r);
                let base = output_base(kind, m, &x, &arg, tau);
                let w = tangent_of_norm(m, &base, 1.0, &mut r);
                let lhs = m.inner(&base, &diff_map(m, kind, &x, &arg, tau, &xi).unwrap(), &w);
                let rhs = m.inner(&x, &xi, &adjoint_diff_map(m, kind, &x, &arg, tau, &w).unwrap());
                assert!((lhs - rhs).abs() < 1e-9, "{} {:?}: {lhs} vs {rhs}", m.name(), kind);
            }
        }
    }
}

#[test]
fn differentials_are_linear() {
    let mut r = rng(13);
    for m in all_manifolds() {
        let m = m.as_ref();
        for kind in DiffKind::ALL {
            let x = m.random_point(&mut r);
            let arg = arg_for(kind, m, &x, 0.7, &mut r);
            let a = tangent_of_norm(m, &x, 1.0, &mut r);
            let b = tangent_of_norm(m, &x, 1.0, &mut r);
            let d = Differential::new(m, kind, &x, &arg, 0.5).unwrap();
            let lhs = d.apply(&add(&scale(&a, 2.0), &scale(&b, -3.0)));
            let rhs = add(&scale(&d.apply(&a), 2.0), &scale(&d.apply(&b), -3.0));
            assert!(rel_err(&lhs, &rhs, 1.0) < 1e-10);
        }
    }
}

#[test]
fn geodesic_in_x_at_tau_one_is_zero() {
    let mut r = rng(14);
    let m = Sphere::new(2);
    let x = m.random_point(&mut r);
    let y = point_at(&m, &x, 0.8, &mut r);
    let eta = tangent_of_norm(&m, &x, 1.0, &mut r);
    let out = diff_map(&m, DiffKind::GeodesicInX, &x, &y, 1.0, &eta).unwrap();
    assert!(manivar::linalg::norm(&out) < 1e-15);
}

#[test]
fn flat_exp_in_point_is_transport() {
    let out = diff_map(&Circle, DiffKind::ExpInPoint, &[0.3], &[0.5], 0.0, &[0.7]).unwrap();
    assert_eq!(out, vec![0.7]);
    let back = adjoint_diff_map(&Circle, DiffKind::ExpInPoint, &[0.3], &[0.5], 0.0, &[0.7]).unwrap();
    assert_eq!(back, vec![0.7]);
}

#[test]
fn frames_are_orthonormal_with_expected_curvature() {
    let mut r = rng(15);
    for m in all_manifolds() {
        let m = m.as_ref();
        for _ in 0..50 {
            let x = m.random_point(&mut r);
            let y = point_at(m, &x, r.random_range(0.0..1.5), &mut r);
            let f = jacobi_frame(m, &x, &y).unwrap();
            assert_eq!(f.basis.len(), m.dim());
            for (i, a) in f.basis.iter().enumerate() {
                for (j, b) in f.basis.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((m.inner(&x, a, b) - want).abs() < 1e-10);
                }
            }
            let name = m.name();
            if name.starts_with("spd") {
                assert!(f.kappa.iter().all(|&k| k <= 0.0));
            }
            if name == "s2" {
                let d = m.dist(&x, &y);
                let mut k = f.kappa.clone();
                k.sort_by(f64::total_cmp);
                assert!(k[0].abs() < 1e-15 && (k[1] - d * d).abs() < 1e-12);
            }
        }
    }
    let f = jacobi_frame(&Circle, &[0.1], &[0.4]).unwrap();
    assert_eq!(f.kappa, vec![0.0]);
}

#[test]
fn conjugate_points_are_reported() {
    // Geodesic of length π on S² starting along e₁: √κ = π.
    let m = Sphere::new(2);
    let x = [0.0, 0.0, 1.0];
    let u = [PI, 0.0, 0.0];
    let err = Differential::new(&m, DiffKind::ExpInTangent, &x, &u, 0.0);
    assert!(err.is_ok(), "sin x / x has no pole");
    let far = m.exp(&x, &[PI - 1e-10, 0.0, 0.0]);
    let e = Differential::new(&m, DiffKind::LogInArgument, &x, &far, 0.0);
    assert!(e.is_err());
}

#[test]
fn rotation_distance_sign_invariance_and_so3_examples() {
    let mut r = rng(16);
    for _ in 0..100 {
        let p = Rotations.random_point(&mut r);
        let q = Rotations.random_point(&mut r);
        let d = Rotations.dist(&p, &q);
        assert!((Rotations.dist(&scale(&p, -1.0), &q) - d).abs() < 1e-12);
        assert!((Rotations.dist(&p, &scale(&q, -1.0)) - d).abs() < 1e-12);
    }
}

#[test]
fn spd_log_at_identity_and_affine_invariance() {
    let m = Spd::new(3);
    let mut r = rng(17);
    // log(I, Q diag(λ) Qᵀ) = Q diag(ln λ) Qᵀ with Q a rotation.
    let q = manivar::manifolds::rotation_matrix(&Rotations.random_point(&mut r));
    let lam = [0.5, 2.0, 3.0];
    let build = |f: &dyn Fn(f64) -> f64| {
        let mut a = nalgebra::DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = (0..3).map(|k| q[i][k] * f(lam[k]) * q[j][k]).sum();
            }
        }
        m.from_matrix(&a)
    };
    let y = build(&|l| l);
    let want = build(&|l: f64| l.ln());
    let got = m.log(&[1.0, 0.0, 0.0, 1.0, 0.0, 1.0], &y).unwrap();
    assert!(rel_err(&got, &want, 1.0) < 1e-12);

    for _ in 0..100 {
        let x = m.random_point(&mut r);
        let y = m.random_point(&mut r);
        let a = nalgebra::DMatrix::from_fn(3, 3, |_, _| r.random_range(-1.0..1.0)) + nalgebra::DMatrix::identity(3, 3);
        let tr = |p: &[f64]| m.from_matrix(&(&a * m.to_matrix(p) * a.transpose()));
        assert!((m.dist(&tr(&x), &tr(&y)) - m.dist(&x, &y)).abs() < 1e-8);
    }
}

#[test]
fn closed_form_transport_properties() {
    let mut r = rng(18);
    for m in all_manifolds() {
        let m = m.as_ref();
        for _ in 0..200 {
            let x = m.random_point(&mut r);
            let y = point_at(m, &x, r.random_range(0.0..1.5), &mut r);
            let xi = tangent_of_norm(m, &x, r.random_range(0.0..2.0), &mut r);
            let t = m.parallel_transport(&x, &y, &xi).unwrap();
            assert!((m.norm(&y, &t) - m.norm(&x, &xi)).abs() < 1e-10);
            m.check_tangent(&y, &t, 1e-10).unwrap();
            // The geodesic velocity is transported to itself.
            let v = m.log(&x, &y).unwrap();
            let tv = m.parallel_transport(&x, &y, &v).unwrap();
            let want = scale(&m.log(&y, &x).unwrap(), -1.0);
            assert!(rel_err(&tv, &want, 1e-3) < 1e-9);
        }
        let x = m.random_point(&mut r);
        let xi = tangent_of_norm(m, &x, 1.0, &mut r);
        assert!(rel_err(&m.parallel_transport(&x, &x, &xi).unwrap(), &xi, 1.0) < 1e-14);
    }
}

#[test]
fn spd_transport_matches_midpoint_formula() {
    let m = Spd::new(2);
    let mut r = rng(19);
    for _ in 0..50 {
        let x = m.random_point(&mut r);
        let y = m.random_point(&mut r);
        let xi = tangent_of_norm(&m, &x, 1.0, &mut r);
        let g = m.to_matrix(&m.geodesic(&x, &y, 0.5).unwrap());
        let xinv = m.to_matrix(&x).try_inverse().unwrap();
        let want = m.from_matrix(&(&g * &xinv * m.to_matrix(&xi) * &xinv * &g));
        let got = m.parallel_transport(&x, &y, &xi).unwrap();
        assert!(rel_err(&got, &want, 1.0) < 1e-10);
    }
}

#[test]
fn sphere_transport_is_tangent_at_target() {
    let m = Sphere::new(2);
    let mut r = rng(20);
    for _ in 0..1000 {
        let x = m.random_point(&mut r);
        let y = point_at(&m, &x, r.random_range(0.0..3.0), &mut r);
        let xi = tangent_of_norm(&m, &x, 1.0, &mut r);
        let t = m.parallel_transport(&x, &y, &xi).unwrap();
        assert!(manivar::linalg::dot(&t, &y).abs() < 1e-10);
    }
}

#[test]
fn geodesic_examples() {
    let mut r = rng(21);
    for m in all_manifolds() {
        let m = m.as_ref();
        for _ in 0..100 {
            let x = m.random_point(&mut r);
            let y = point_at(m, &x, r.random_range(0.0..1.5), &mut r);
            assert!(m.dist(&m.geodesic(&x, &y, 0.0).unwrap(), &x) < 1e-12);
            assert!(m.dist(&m.geodesic(&x, &y, 1.0).unwrap(), &y) < 1e-10);
            let c = m.geodesic(&x, &y, 0.5).unwrap();
            assert!((m.dist(&x, &c) - m.dist(&y, &c)).abs() < 1e-10);
        }
    }
    let s = Sphere::new(2);
    let z = s.geodesic(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], 2.0).unwrap();
    let via_exp = s.exp(&[0.0, 0.0, 1.0], &[PI, 0.0, 0.0]);
    assert!(rel_err(&z, &via_exp, 1.0) < 1e-15);
    assert!(rel_err(&z, &[0.0, 0.0, -1.0], 1.0) < 1e-15);
}

#[test]
fn log_exp_round_trip_thousand_samples() {
    let mut r = rng(22);
    for m in all_manifolds() {
        let m = m.as_ref();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = m.random_point(&mut r);
            let y = point_at(m, &x, r.random_range(0.0..2.0), &mut r);
            let v = m.log(&x, &y).unwrap();
            worst = worst.max(m.dist(&m.exp(&x, &v), &y));
            assert!((m.norm(&x, &v) - m.dist(&x, &y)).abs() < 1e-9);
        }
        assert!(worst < 1e-9, "{}: {worst:e}", m.name());
    }
}

fn manifold_by_index(i: usize) -> std::sync::Arc<dyn Manifold> {
    all_manifolds().swap_remove(i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn small_steps_have_exact_length(seed in any::<u64>(), mi in 0usize..6, len in 0.0f64..0.5) {
        let m = manifold_by_index(mi);
        let mut r = rng(seed);
        let x = m.random_point(&mut r);
        let v = tangent_of_norm(m.as_ref(), &x, len, &mut r);
        prop_assert!((m.dist(&m.exp(&x, &v), &x) - m.norm(&x, &v)).abs() < 1e-9);
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>(), mi in 0usize..6, len in 0.0f64..1.5) {
        let m = manifold_by_index(mi);
        let mut r = rng(seed);
        let x = m.random_point(&mut r);
        let v = tangent_of_norm(m.as_ref(), &x, len, &mut r);
        let back = m.log(&x, &m.exp(&x, &v)).unwrap();
        prop_assert!(rel_err(&back, &v, 1.0) < 1e-9);
    }

    #[test]
    fn distance_is_symmetric(seed in any::<u64>(), mi in 0usize..6) {
        let m = manifold_by_index(mi);
        let mut r = rng(seed);
        let x = m.random_point(&mut r);
        let y = m.random_point(&mut r);
        prop_assert!((m.dist(&x, &y) - m.dist(&y, &x)).abs() < 1e-10);
        prop_assert!(m.dist(&x, &x) < 1e-7);
    }

    #[test]
    fn inner_is_positive(seed in any::<u64>(), mi in 0usize..6) {
        let m = manifold_by_index(mi);
        let mut r = rng(seed);
        let x = m.random_point(&mut r);
        let v = tangent_of_norm(m.as_ref(), &x, 1.0, &mut r);
        prop_assert!(m.inner(&x, &v, &v) > 0.0);
        let z = vec![0.0; m.point_len()];
        prop_assert_eq!(m.inner(&x, &z, &z), 0.0);
    }
}
