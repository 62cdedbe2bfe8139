mod common;

use common::*;
use nalgebra::DVector;
use pole_ladder::geometry;
use pole_ladder::manifolds::{Sphere, SYMMETRIC_FLEET};
use pole_ladder::{Point, SchemeKind, TangentVector};
use proptest::prelude::*;

fn manifold() -> impl Strategy<Value = &'static str> {
    prop::sample::select(FLEET.to_vec())
}

fn symmetric() -> impl Strategy<Value = &'static str> {
    prop::sample::select(SYMMETRIC_FLEET.to_vec())
}

fn relative(a: &TangentVector, b: &TangentVector) -> f64 {
    dist(a, b) / a.component_norm().max(b.component_norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_log_round_trip(name in manifold(), seed in any::<u64>()) {
        let s = space(name);
        let (p, q, _) = random_problem(s.as_ref(), &mut rng(seed));
        let v = geometry::log(s.as_ref(), &p, &q).unwrap();
        let again = geometry::exp(s.as_ref(), &p, &v).unwrap();
        prop_assert!(again.coord_distance(&q) <= s.tolerances().log_tol, "{name}");
        let back = geometry::log(s.as_ref(), &p, &again).unwrap();
        prop_assert!(relative(&back, &v) <= s.tolerances().log_tol);
    }

    #[test]
    fn midpoint_is_a_barycenter(name in manifold(), seed in any::<u64>()) {
        let s = space(name);
        let (p, q, _) = random_problem(s.as_ref(), &mut rng(seed));
        let m = geometry::midpoint(s.as_ref(), &p, &q).unwrap();
        prop_assert!(geometry::barycenter_residual(s.as_ref(), &m, &p, &q).unwrap() <= s.tolerances().log_tol);
        let sym = geometry::geodesic_symmetry(s.as_ref(), &m, &p).unwrap();
        prop_assert!(sym.coord_distance(&q) <= s.tolerances().log_tol);
    }

    #[test]
    fn symmetry_is_an_involution(name in manifold(), seed in any::<u64>()) {
        let s = space(name);
        let (p, q, _) = random_problem(s.as_ref(), &mut rng(seed));
        let once = geometry::geodesic_symmetry(s.as_ref(), &p, &q).unwrap();
        let twice = geometry::geodesic_symmetry(s.as_ref(), &p, &once).unwrap();
        prop_assert!(twice.coord_distance(&q) <= s.tolerances().log_tol, "{name}");
        prop_assert!(geometry::geodesic_symmetry(s.as_ref(), &p, &p).unwrap() == p);
    }

    #[test]
    fn symmetries_compose(name in symmetric(), seed in any::<u64>()) {
        let s = space(name);
        let mut r = rng(seed);
        let (p, q, _) = random_problem(s.as_ref(), &mut r);
        let (x, _, _) = random_problem(s.as_ref(), &mut r);
        let sym = |c: &Point, y: &Point| geometry::geodesic_symmetry(s.as_ref(), c, y).unwrap();
        let lhs = sym(&q, &sym(&p, &sym(&q, &x)));
        let rhs = sym(&sym(&q, &p), &x);
        prop_assert!(lhs.coord_distance(&rhs) <= 1e-9, "{name}: {:e}", lhs.coord_distance(&rhs));
    }

    #[test]
    fn transport_is_a_linear_isometry(name in manifold(), seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let s = space(name);
        let mut r = rng(seed);
        let (p, q, u) = random_problem(s.as_ref(), &mut r);
        let w = random_vector(s.as_ref(), &p, 1.0, &mut r);
        let t = |x: &TangentVector| geometry::transport_oracle(s.as_ref(), x, &q).unwrap();
        let (tu, tw) = (t(&u), t(&w));
        let lhs = t(&u.scale(a).axpy(b, &w));
        prop_assert!(relative(&lhs, &tu.scale(a).axpy(b, &tw)) <= 1e-10);
        if s.capabilities().has_metric {
            let before = s.inner(&u, &w).unwrap();
            let after = s.inner(&tu, &tw).unwrap();
            prop_assert!((before - after).abs() <= 1e-10 * (1.0 + before.abs()), "{name}");
            prop_assert!(s.tangency_residual(&tu) <= s.tolerances().membership_tol);
        }
    }

    #[test]
    fn curvature_symmetries(name in manifold(), seed in any::<u64>()) {
        let s = space(name);
        let mut r = rng(seed);
        let p = s.sample_point(&mut r, 0.5);
        let t: Vec<TangentVector> = (0..3).map(|_| s.sample_unit_tangent(&p, &mut r)).collect();
        let (x, y, z) = (&t[0], &t[1], &t[2]);
        let rr = |a: &TangentVector, b: &TangentVector, c: &TangentVector| geometry::curvature(s.as_ref(), &p, a, b, c).unwrap();
        let scale = t.iter().map(|v| v.component_norm()).product::<f64>();
        prop_assert!(rr(x, y, z).add(&rr(y, x, z)).component_norm() <= 1e-12 * scale);
        let bianchi = rr(x, y, z).add(&rr(y, z, x)).add(&rr(z, x, y));
        prop_assert!(bianchi.component_norm() <= 1e-9 * scale, "{name}: {:e}", bianchi.component_norm());
        prop_assert!(rr(x, x, z).component_norm() <= 1e-12 * scale);
    }

    #[test]
    fn covariant_curvature_vanishes_on_symmetric_spaces(name in symmetric(), seed in any::<u64>()) {
        let s = space(name);
        let mut r = rng(seed);
        let p = s.sample_point(&mut r, 0.8);
        let t: Vec<TangentVector> = (0..4).map(|_| s.sample_unit_tangent(&p, &mut r)).collect();
        let nr = geometry::nabla_curvature(s.as_ref(), &p, &t[0], &t[1], &t[2], &t[3]).unwrap();
        prop_assert!(nr.component_norm() <= 1e-8);
    }

    #[test]
    fn pole_steps_are_exact_and_linear_on_symmetric_spaces(name in symmetric(), seed in any::<u64>(), a in -1.0..1.0f64) {
        let s = space(name);
        let mut r = rng(seed);
        let (p, q, u) = random_problem(s.as_ref(), &mut r);
        let w = random_vector(s.as_ref(), &p, 0.5, &mut r);
        for kind in SchemeKind::POLE {
            let step = |x: &TangentVector| kind.step(s.as_ref(), &p, &q, x).unwrap();
            let oracle = geometry::transport_oracle(s.as_ref(), &u, &q).unwrap();
            prop_assert!(dist(&step(&u), &oracle) <= 1e-10 * s.norm(&u).max(1.0), "{name} {kind}");
            prop_assert!(relative(&step(&u.axpy(a, &w)), &step(&u).axpy(a, &step(&w))) <= 1e-10);
        }
    }

    #[test]
    fn zero_input_transports_to_zero(name in manifold(), seed in any::<u64>()) {
        let s = space(name);
        let (p, q, _) = random_problem(s.as_ref(), &mut rng(seed));
        for kind in SchemeKind::ALL {
            let out = kind.step(s.as_ref(), &p, &q, &TangentVector::zero(&p)).unwrap();
            prop_assert!(out.is_zero() && out.base == q);
        }
    }

    #[test]
    fn sphere_round_trip_from_raw_coordinates(
        x in prop::array::uniform3(-1.0..1.0f64),
        d in prop::array::uniform3(-1.0..1.0f64),
        len in 0.01..3.0f64,
    ) {
        let xv = DVector::from_row_slice(&x);
        prop_assume!(xv.norm() > 0.1);
        let p = Point::new(xv.normalize());
        let dv = DVector::from_row_slice(&d);
        let tangent = &dv - &p.coords * p.coords.dot(&dv);
        prop_assume!(tangent.norm() > 0.1);
        let v = TangentVector::new(p.clone(), tangent.normalize() * len);
        let s = Sphere::new(2);
        let q = geometry::exp(&s, &p, &v).unwrap();
        prop_assert!((q.coords.norm() - 1.0).abs() < 1e-14);
        let back = geometry::log(&s, &p, &q).unwrap();
        prop_assert!(dist(&back, &v) <= 1e-9);
    }
}
