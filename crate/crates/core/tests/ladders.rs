mod common;

use common::*;
use manivar::linalg::{add, norm, scale, sub};
use manivar::manifold::Manifold;
use manivar::manifolds::{Circle, Sphere};
use manivar::transport::{pole_ladder, pole_ladder_differentials, schild_ladder, LadderInput, PoleLadder};
use rand::Rng;

#[test]
fn pole_ladder_equals_closed_form() {
    let mut r = rng(31);
    for m in all_manifolds() {
        let m = m.as_ref();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = m.random_point(&mut r);
            let y = point_at(m, &x, r.random_range(0.0..1.0), &mut r);
            let xi = tangent_of_norm(m, &x, r.random_range(0.0..1.0), &mut r);
            let p = pole_ladder(m, &x, &y, &xi).unwrap();
            let c = m.parallel_transport(&x, &y, &xi).unwrap();
            worst = worst.max(norm(&sub(&p, &c)));
            assert!((m.norm(&y, &p) - m.norm(&x, &xi)).abs() < 1e-9);
        }
        assert!(worst < 1e-10, "{}: {worst:e}", m.name());
    }
}

#[test]
fn degenerate_ladders() {
    let mut r = rng(32);
    for m in all_manifolds() {
        let m = m.as_ref();
        let x = m.random_point(&mut r);
        let y = point_at(m, &x, 0.6, &mut r);
        let xi = tangent_of_norm(m, &x, 0.5, &mut r);
        assert!(rel_err(&pole_ladder(m, &x, &x, &xi).unwrap(), &xi, 1.0) < 1e-12);
        assert!(rel_err(&schild_ladder(m, &x, &x, &xi).unwrap(), &xi, 1.0) < 1e-12);
        let z = vec![0.0; m.point_len()];
        assert!(norm(&pole_ladder(m, &x, &y, &z).unwrap()) < 1e-12);
    }
}

#[test]
fn pole_ladder_is_linear() {
    let mut r = rng(33);
    for m in all_manifolds() {
        let m = m.as_ref();
        let x = m.random_point(&mut r);
        let y = point_at(m, &x, 0.8, &mut r);
        let a = tangent_of_norm(m, &x, 0.4, &mut r);
        let b = tangent_of_norm(m, &x, 0.3, &mut r);
        let lhs = pole_ladder(m, &x, &y, &add(&a, &scale(&b, 0.5))).unwrap();
        let rhs = add(&pole_ladder(m, &x, &y, &a).unwrap(), &scale(&pole_ladder(m, &x, &y, &b).unwrap(), 0.5));
        assert!(norm(&sub(&lhs, &rhs)) < 1e-9);
    }
}

#[test]
fn schild_is_exact_in_flat_space() {
    let p = schild_ladder(&Circle, &[0.1], &[0.35], &[0.07]).unwrap();
    assert!((p[0] - 0.07).abs() < 1e-15);
}

#[test]
fn schild_error_decays_quadratically_in_ladder_size() {
    let m = Sphere::new(2);
    let mut r = rng(34);
    let mut ratio = 0.0;
    let trials = 100;
    for _ in 0..trials {
        let x = m.random_point(&mut r);
        let v = tangent_of_norm(&m, &x, 0.4, &mut r);
        let xi = tangent_of_norm(&m, &x, 0.4, &mut r);
        let rel = |s: f64| {
            let y = m.exp(&x, &scale(&v, s));
            let xs = scale(&xi, s);
            let e = norm(&sub(&schild_ladder(&m, &x, &y, &xs).unwrap(), &m.parallel_transport(&x, &y, &xs).unwrap()));
            e / norm(&xs)
        };
        ratio += rel(1.0) / rel(0.5);
    }
    ratio /= trials as f64;
    assert!(ratio >= 3.5, "mean ratio {ratio}");
}

#[test]
fn ladder_adjoint_matches_finite_differences() {
    let mut r = rng(35);
    let h = 1e-5;
    for m in all_manifolds() {
        let m = m.as_ref();
        for _ in 0..30 {
            let x = m.random_point(&mut r);
            let y = point_at(m, &x, r.random_range(0.05..1.0), &mut r);
            let xi = tangent_of_norm(m, &x, r.random_range(0.05..0.8), &mut r);
            let xi_y = tangent_of_norm(m, &y, 0.5, &mut r);
            let (ex, ey, b) = (
                tangent_of_norm(m, &x, 1.0, &mut r),
                tangent_of_norm(m, &y, 1.0, &mut r),
                tangent_of_norm(m, &x, 1.0, &mut r),
            );
            let f = |s: f64| {
                let xs = m.exp(&x, &scale(&ex, s));
                let ys = m.exp(&y, &scale(&ey, s));
                let xis = m.parallel_transport(&x, &xs, &add(&xi, &scale(&b, s))).unwrap();
                let xiys = m.parallel_transport(&y, &ys, &xi_y).unwrap();
                let d = sub(&xiys, &pole_ladder(m, &xs, &ys, &xis).unwrap());
                m.inner(&ys, &d, &d)
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let lad = PoleLadder::new(m, &x, &y, &xi).unwrap();
            let w = scale(&sub(&xi_y, &lad.zeta), -2.0);
            let g = lad.adjoint(m, &w).unwrap();
            let an = m.inner(&x, &g.x, &ex) + m.inner(&y, &g.y, &ey) + m.inner(&x, &g.xi, &b);
            assert!((an - fd).abs() <= 1e-4 * fd.abs().max(1e-2), "{}: {an} vs {fd}", m.name());
        }
    }
}

#[test]
fn ladder_differentials_entry_points() {
    let m = Sphere::new(2);
    let mut r = rng(36);
    let x = m.random_point(&mut r);
    let y = point_at(&m, &x, 0.5, &mut r);
    let xi = tangent_of_norm(&m, &x, 0.3, &mut r);
    let z = vec![0.0; 3];
    for wrt in [LadderInput::XiPrev, LadderInput::XPoint, LadderInput::YPoint] {
        assert!(norm(&pole_ladder_differentials(&m, &x, &y, &xi, wrt, &z).unwrap()) == 0.0);
    }
    // Flat case: the ξ chain transports w back unchanged.
    let g = pole_ladder_differentials(&Circle, &[0.2], &[0.5], &[0.1], LadderInput::XiPrev, &[0.7]).unwrap();
    assert!((g[0] - 0.7).abs() < 1e-14);
}
