use buffdyn_core::cplx::c;
use buffdyn_core::rays::{
    green_potential, hausdorff_distance, landing_point, trace_ray, trace_ray_partial, uniform_parameter_distance,
    RayAngle, RayOptions, RayTail,
};
use buffdyn_core::{AnalyticMap, Complex};
use proptest::prelude::*;

fn quad(cp: Complex) -> AnalyticMap {
    AnalyticMap::polynomial(vec![cp, c(0.0, 0.0), c(1.0, 0.0)], 1e6).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn traced_rays_are_invariant_and_descend(re in -0.7..0.24f64, im in -0.3..0.3f64) {
        let map = quad(c(re, im));
        let ray = trace_ray_partial(&map, RayAngle::new(0, 1).unwrap(), 1, &RayOptions { t_min: -4.0, ..Default::default() }).unwrap();
        let m = 32;
        let mut prev = f64::INFINITY;
        for (k, (t, z)) in ray.samples.iter().enumerate() {
            let g = green_potential(&map, *z).unwrap();
            prop_assert!(((g - 2f64.powf(*t)) / g).abs() < 1e-6);
            prop_assert!(g < prev);
            prev = g;
            if k >= m {
                let img = z * z + c(re, im);
                prop_assert!((img - ray.samples[k - m].1).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn hausdorff_is_bounded_by_uniform_distance(pts in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..40), dx in -0.1..0.1f64, dy in -0.1..0.1f64) {
        let a: Vec<Complex> = pts.iter().map(|(x, y)| c(*x, *y)).collect();
        let b: Vec<Complex> = a.iter().enumerate().map(|(k, z)| z + c(dx, dy) * (k as f64 / 40.0)).collect();
        let ra = RayTail::from_points(&a, 1.0 / 32.0, None).unwrap();
        let rb = RayTail::from_points(&b, 1.0 / 32.0, None).unwrap();
        let h = hausdorff_distance(&ra, &rb).unwrap();
        prop_assert!((h - hausdorff_distance(&rb, &ra).unwrap()).abs() < 1e-15);
        prop_assert!(h <= uniform_parameter_distance(&ra, &rb).unwrap() + 1e-15);
    }
}

#[test]
fn real_rays_stay_on_their_half_lines() {
    let ray = trace_ray(&quad(c(0.0, 0.0)), RayAngle::new(0, 1).unwrap(), 1, -6.0, 1.0 / 32.0).unwrap();
    assert!(ray.points().all(|z| z.im == 0.0 && z.re > 0.0));
    let ray = trace_ray(&quad(c(-2.0, 0.0)), RayAngle::new(0, 1).unwrap(), 1, -40.0, 1.0 / 32.0).unwrap();
    assert!(ray.points().all(|z| z.re >= 2.0 - 1e-12 && z.im.abs() < 1e-12));
}

#[test]
fn landing_is_stable_under_step_halving() {
    for cp in [0.24, -2.0, 0.1] {
        let map = quad(c(cp, 0.0));
        let mut found = Vec::new();
        for dt in [1.0 / 32.0, 1.0 / 64.0] {
            let ray = trace_ray_partial(&map, RayAngle::new(0, 1).unwrap(), 1, &RayOptions { dt, t_min: -300.0, ..Default::default() }).unwrap();
            found.push(ray.landing.expect("ray should land"));
        }
        assert!((found[0] - found[1]).norm() < 1e-12, "c = {cp}: {found:?}");
    }
}

#[test]
fn parabolic_ray_approaches_its_fixed_point() {
    let ray = trace_ray_partial(&quad(c(0.25, 0.0)), RayAngle::new(0, 1).unwrap(), 1, &RayOptions { t_min: -400.0, ..Default::default() }).unwrap();
    assert!(ray.landing.is_none());
    assert_eq!(landing_point(&ray, &[c(0.5, 0.0)], 1e-2), Some(c(0.5, 0.0)));
    assert!(ray.points().all(|z| z.re > 0.5));
}

#[test]
fn perturbed_rays_approach_the_parabolic_ray() {
    let opts = RayOptions { t_min: -300.0, ..Default::default() };
    let limit = trace_ray_partial(&quad(c(0.25, 0.0)), RayAngle::new(0, 1).unwrap(), 1, &opts).unwrap();
    let mut prev = f64::INFINITY;
    for cp in [0.24, 0.2475, 0.249375] {
        let ray = trace_ray_partial(&quad(c(cp, 0.0)), RayAngle::new(0, 1).unwrap(), 1, &opts).unwrap();
        let h = hausdorff_distance(&ray, &limit).unwrap();
        assert!(h > 0.0 && h < prev, "c = {cp}: {h}");
        prev = h;
    }
}
