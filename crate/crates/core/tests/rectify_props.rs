use buffdyn_core::buffform::BuffForm;
use buffdyn_core::cplx::c;
use buffdyn_core::rectify::{
    cone_contains, integrate_path, lift_path, lifted_step, lifted_step_inverse, monodromy, ConeSign, ConeSpec,
    PathPolyline,
};
use buffdyn_core::{AnalyticMap, Complex};
use proptest::prelude::*;

fn quadratic(l: Complex) -> BuffForm {
    BuffForm::new(AnalyticMap::polynomial(vec![c(0.0, 0.0), l, c(1.0, 0.0)], 0.4).unwrap()).unwrap()
}

fn off_one() -> impl Strategy<Value = Complex> {
    (0.85..1.15f64, -0.1..0.1f64)
        .prop_map(|(a, b)| c(a, b))
        .prop_filter("away from 1", |l| (l - 1.0).norm() > 0.02)
}

fn point() -> impl Strategy<Value = Complex> {
    (0.05..0.3f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn small_triangles_lift_to_closed_curves(l in off_one(), z in point(), a in 0.0..std::f64::consts::TAU, b in 0.0..std::f64::consts::TAU) {
        let form = quadratic(l);
        let size = 0.3 * form.nearest_fixed_point(z).unwrap().1;
        let p1 = z + Complex::from_polar(size, a);
        let p2 = z + Complex::from_polar(size, b);
        prop_assume!((p1 - p2).norm() > 1e-3 * size);
        let tri = PathPolyline::new(vec![z, p1, p2, z]).unwrap();
        let lift = lift_path(&form, &tri, c(1.0, 2.0)).unwrap();
        prop_assert!((lift.end_value() - c(1.0, 2.0)).norm() < 1e-9);
    }

    #[test]
    fn loops_realise_the_monodromy(l in off_one()) {
        let form = quadratic(l);
        for rec in form.fixed_points() {
            let other = form.fixed_points().iter().filter(|r| r.location != rec.location).map(|r| (r.location - rec.location).norm()).fold(1.0, f64::min);
            let lp = PathPolyline::circle(rec.location, 0.3 * other, 48, 0.2).unwrap();
            let lift = lift_path(&form, &lp, c(0.0, 0.0)).unwrap();
            prop_assert!((lift.translation() - monodromy(&form, rec.location).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn reversed_paths_negate(l in off_one(), a in point(), b in point()) {
        let form = quadratic(l);
        let fwd = PathPolyline::segment(a, b).unwrap();
        let bwd = PathPolyline::segment(b, a).unwrap();
        match (integrate_path(&form, &fwd), integrate_path(&form, &bwd)) {
            (Ok(x), Ok(y)) => prop_assert!((x + y).norm() < 1e-9 * x.norm().max(1.0)),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "asymmetric outcome {:?} {:?}", x, y),
        }
    }

    #[test]
    fn step_then_inverse_is_identity(l in off_one(), z in point()) {
        let form = quadratic(l);
        prop_assume!(form.nearest_fixed_point(z).unwrap().1 > 0.01);
        let w0 = c(0.5, -1.5);
        let (z1, w1) = lifted_step(&form, z, w0).unwrap();
        prop_assume!(z1.norm() < 0.38);
        let (z2, w2) = lifted_step_inverse(&form, z1, w1, z1).unwrap();
        prop_assert!((z2 - z).norm() < 1e-9);
        prop_assert!((w2 - w0).norm() < 1e-9);
    }

    #[test]
    fn orbits_over_small_u_stay_in_the_cone(r in 0.01..0.04f64, t in -0.6..0.6f64) {
        // attracting petal of z + z^2, where |u_f| is about |z|^2 / 6
        let form = BuffForm::new(AnalyticMap::real_polynomial(&[0.0, 1.0, 1.0], 0.3).unwrap()).unwrap();
        let eps = 0.01;
        let mut z = -Complex::from_polar(r, t);
        let z0 = c(0.0, 0.0);
        let mut big = z0;
        let mut max_u = 0.0_f64;
        let mut orbit = Vec::new();
        for _ in 0..40 {
            max_u = max_u.max(form.u_f(z).unwrap().norm());
            let (zn, bn) = lifted_step(&form, z, big).unwrap();
            z = zn;
            big = bn;
            orbit.push(big);
        }
        prop_assume!(max_u < eps);
        let cone = ConeSpec::new(z0, eps, ConeSign::Plus).unwrap();
        for w in orbit {
            prop_assert!(cone_contains(&cone, w));
        }
    }
}
