//! External rays of polynomials: Green's potential, tracing in the
//! parameter `t = log s / log(d^q)`, landing, distances between ray tails
//! and the gate test.

use std::f64::consts::TAU;

use rstar::RTree;
use serde::Serialize;

use crate::fixpoint::find_fixed_points;
use crate::germ::AnalyticMap;
use crate::{Complex, Error, Result};

/// Iteration cap for [`green_potential`].
pub const MAX_ESCAPE_ITER: usize = 100_000;
const ESCAPE_RADIUS: f64 = 1e20;
/// Böttcher targets are placed at potential at least this large, where the
/// Böttcher map is the identity to double precision.
const TARGET_POTENTIAL: f64 = 18.420680743952367; // ln 1e8
const START_POTENTIAL: f64 = 16.0;
pub const DEFAULT_DT: f64 = 1.0 / 32.0;
pub const MIN_DT: f64 = 1.0 / 512.0;
pub const DEFAULT_LANDING_TOL: f64 = 1e-6;
pub const LANDING_WINDOW: usize = 8;
const NEWTON_ITERS: usize = 60;

/// A polynomial prepared for escape-time work.
#[derive(Debug, Clone)]
struct Poly {
    coeffs: Vec<Complex>,
    degree: u32,
    /// `a^(1/(d-1))` for leading coefficient `a`.
    bottcher_scale: Complex,
}

impl Poly {
    fn new(map: &AnalyticMap) -> Result<Self> {
        let coeffs = map
            .coefficients()
            .ok_or_else(|| Error::InvalidMap("external rays need an explicit polynomial".into()))?
            .to_vec();
        let degree = map.degree() as u32;
        if degree < 2 {
            return Err(Error::InvalidMap(format!("degree {degree} has no external rays")));
        }
        let a = map.leading_coefficient();
        Ok(Poly { coeffs, degree, bottcher_scale: a.powf(1.0 / (degree - 1) as f64) })
    }

    fn eval(&self, z: Complex) -> (Complex, Complex) {
        let mut v = Complex::new(0.0, 0.0);
        let mut d = Complex::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    }

    fn iterate(&self, z: Complex, n: u32) -> (Complex, Complex) {
        let mut w = z;
        let mut dw = Complex::new(1.0, 0.0);
        for _ in 0..n {
            let (v, d) = self.eval(w);
            dw *= d;
            w = v;
        }
        (w, dw)
    }

    /// A radius outside of which every orbit escapes.
    fn escape_bound(&self) -> f64 {
        let a = self.coeffs.last().unwrap().norm();
        let rest: f64 = self.coeffs[..self.coeffs.len() - 1].iter().map(|c| c.norm()).sum();
        2.0 * ((rest + 1.0) / a).max(1.0)
    }
}

/// Green's potential `lim log|P^n(z)| / d^n`.
pub fn green_potential(map: &AnalyticMap, z: Complex) -> Result<f64> {
    let p = Poly::new(map)?;
    let d = p.degree as f64;
    let mut w = z;
    for n in 0..MAX_ESCAPE_ITER {
        let r = w.norm();
        if r > ESCAPE_RADIUS {
            let g = r.ln() + p.bottcher_scale.norm().ln();
            return Ok(g / d.powi(n as i32));
        }
        if !r.is_finite() {
            break;
        }
        w = p.eval(w).0;
    }
    Err(Error::NonEscaping { z, iterations: MAX_ESCAPE_ITER })
}

/// An angle `num / den` in turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RayAngle {
    pub num: u64,
    pub den: u64,
}

impl RayAngle {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("angle with zero denominator".into()));
        }
        Ok(RayAngle { num: num % den, den })
    }

    pub fn turns(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `d^n theta mod 1`, exactly.
    pub fn multiplied(&self, d: u32, n: u32) -> RayAngle {
        let mut num = self.num as u128;
        let den = self.den as u128;
        for _ in 0..n {
            num = (num * d as u128) % den;
        }
        RayAngle { num: num as u64, den: self.den }
    }

    pub fn has_period(&self, d: u32, q: u32) -> bool {
        self.multiplied(d, q) == *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RayTermination {
    Landed,
    ReachedTMin,
    NewtonFailure { t: f64 },
}

/// Samples of one ray tail at `t = 0, -dt, -2 dt, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayTail {
    pub angle: RayAngle,
    pub degree: u32,
    pub period: u32,
    pub dt: f64,
    pub samples: Vec<(f64, Complex)>,
    pub landing: Option<Complex>,
    /// Potential of the deepest sample; may underflow to 0 for deep tails.
    pub potential_floor: f64,
    pub termination: RayTermination,
}

impl RayTail {
    /// A ray from given points on the grid `t_k = -k dt`, for synthetic tests
    /// and for reloading.
    pub fn from_points(points: &[Complex], dt: f64, landing: Option<Complex>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyRay);
        }
        Ok(RayTail {
            angle: RayAngle { num: 0, den: 1 },
            degree: 2,
            period: 1,
            dt,
            samples: points.iter().enumerate().map(|(k, z)| (-(k as f64) * dt, *z)).collect(),
            landing,
            potential_floor: 0.0,
            termination: RayTermination::ReachedTMin,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = Complex> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn deepest(&self) -> Option<Complex> {
        self.samples.last().map(|s| s.1)
    }

    /// Sample points followed by the landing point, if any.
    pub fn compactified(&self) -> Vec<Complex> {
        let mut v: Vec<Complex> = self.points().collect();
        v.extend(self.landing);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayOptions {
    pub dt: f64,
    pub t_min: f64,
    pub landing_tol: f64,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions { dt: DEFAULT_DT, t_min: -64.0, landing_tol: DEFAULT_LANDING_TOL }
    }
}

/// Trace a ray, failing if Newton breaks down anywhere along it.
pub fn trace_ray(map: &AnalyticMap, theta: RayAngle, q: u32, t_min: f64, dt: f64) -> Result<RayTail> {
    let ray = trace_ray_partial(map, theta, q, &RayOptions { dt, t_min, landing_tol: DEFAULT_LANDING_TOL })?;
    if let RayTermination::NewtonFailure { t } = ray.termination {
        return Err(Error::NewtonDivergence { t });
    }
    Ok(ray)
}

/// Fixed points of `P^q`, the possible landing points of period-`q` rays.
pub fn landing_candidates(map: &AnalyticMap, q: u32) -> Result<Vec<Complex>> {
    let p = Poly::new(map)?;
    let r = p.escape_bound();
    let base = map.with_radius(r * 1.5)?;
    let it = if q == 1 { base } else { AnalyticMap::iterate(base, q, r * 1.5)? };
    Ok(find_fixed_points(&it, r * 1.5)?.into_iter().map(|rec| rec.location).collect())
}

/// Trace a ray, keeping whatever was traced before a Newton failure.
pub fn trace_ray_partial(map: &AnalyticMap, theta: RayAngle, q: u32, opts: &RayOptions) -> Result<RayTail> {
    let p = Poly::new(map)?;
    let d = p.degree;
    if q == 0 || !theta.has_period(d, q) {
        return Err(Error::InvalidArgument(format!("angle {}/{} does not have period {q} under x{d}", theta.num, theta.den)));
    }
    let per_unit = (1.0 / opts.dt).round();
    if !(opts.dt > 0.0) || (per_unit * opts.dt - 1.0).abs() > 1e-12 || opts.dt > 1.0 / 16.0 {
        return Err(Error::InvalidArgument(format!("dt = {} must be 1/m with m >= 16", opts.dt)));
    }
    if !(opts.t_min < 0.0) {
        return Err(Error::InvalidArgument("t_min must be negative".into()));
    }
    let m = per_unit as usize;
    let candidates = landing_candidates(map, q)?;
    let dq = (d as f64).powi(q as i32);
    let potential = |t: f64| dq.powf(t);

    // descend from a high level, where z is the Böttcher target itself
    let t_start = (START_POTENTIAL.ln() / dq.ln() / opts.dt).ceil() * opts.dt;
    let mut z = bottcher_target(&p, theta, potential(t_start), 0);
    let mut t = t_start;
    let mut samples: Vec<(f64, Complex)> = Vec::new();
    let mut termination = RayTermination::ReachedTMin;
    let mut k: i64 = (t_start / opts.dt).round() as i64;
    'outer: while k > -(m as i64) {
        let next_t = (k - 1) as f64 * opts.dt;
        match descend(&p, theta, z, t, next_t, dq) {
            Ok(zn) => z = zn,
            Err(_) => {
                termination = RayTermination::NewtonFailure { t: next_t };
                break 'outer;
            }
        }
        t = next_t;
        k -= 1;
        if k <= 0 {
            samples.push((t, z));
        }
    }
    if samples.is_empty() && k >= 0 {
        // failed before reaching t = 0
        return Err(Error::NewtonDivergence { t });
    }
    let mut landing = None;
    if termination == RayTermination::ReachedTMin {
        let total = (-opts.t_min / opts.dt).floor() as usize + 1;
        while samples.len() < total {
            let idx = samples.len();
            let target = samples[idx - m].1;
            let seed = samples[idx - 1].1;
            let tt = -(idx as f64) * opts.dt;
            match pull_back(&p, q, target, seed) {
                Ok(zn) => samples.push((tt, zn)),
                Err(_) => {
                    termination = RayTermination::NewtonFailure { t: tt };
                    break;
                }
            }
            if let Some(c) = landing_test(&samples, &candidates, opts.landing_tol) {
                landing = Some(c);
                termination = RayTermination::Landed;
                break;
            }
        }
    }
    let t_floor = samples.last().map_or(0.0, |s| s.0);
    Ok(RayTail {
        angle: theta,
        degree: d,
        period: q,
        dt: opts.dt,
        samples,
        landing,
        potential_floor: potential(t_floor),
        termination,
    })
}

/// The point with Böttcher coordinate `exp(s + 2 pi i theta)` pushed forward
/// `n` times, where the Böttcher map is the scaling by `a^(1/(d-1))`.
fn bottcher_target(p: &Poly, theta: RayAngle, s: f64, n: u32) -> Complex {
    let dn = (p.degree as f64).powi(n as i32);
    let ang = theta.multiplied(p.degree, n).turns();
    Complex::from_polar((s * dn).exp(), TAU * ang) / p.bottcher_scale
}

fn level_for(p: &Poly, s: f64) -> u32 {
    let d = p.degree as f64;
    let mut n = 0;
    while s * d.powi(n) < TARGET_POTENTIAL {
        n += 1;
    }
    n as u32
}

/// Move the ray point from parameter `t0` to `t1`, splitting the step while
/// Newton fails, down to [`MIN_DT`].
fn descend(p: &Poly, theta: RayAngle, z0: Complex, t0: f64, t1: f64, dq: f64) -> Result<Complex> {
    match bottcher_newton(p, theta, z0, dq.powf(t1)) {
        Ok(z) => Ok(z),
        Err(e) => {
            if (t0 - t1).abs() <= MIN_DT * (1.0 + 1e-12) {
                return Err(e);
            }
            let mid = 0.5 * (t0 + t1);
            let zm = descend(p, theta, z0, t0, mid, dq)?;
            descend(p, theta, zm, mid, t1, dq)
        }
    }
}

fn bottcher_newton(p: &Poly, theta: RayAngle, seed: Complex, s: f64) -> Result<Complex> {
    let n = level_for(p, s);
    let w = bottcher_target(p, theta, s, n);
    let mut z = seed;
    for _ in 0..NEWTON_ITERS {
        let (v, dv) = p.iterate(z, n);
        if dv.norm() == 0.0 || !crate::cplx::is_finite(v) {
            return Err(Error::NewtonDivergence { t: s.ln() });
        }
        let step = (v - w) / dv;
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1e-300) {
            // accept only if z is the preimage continuing the seed
            let (v, dv) = p.iterate(z, n);
            let spacing = TAU * v.norm() / dv.norm();
            if (z - seed).norm() < 0.25 * spacing {
                return Ok(z);
            }
            return Err(Error::NewtonDivergence { t: s.ln() });
        }
    }
    Err(Error::NewtonDivergence { t: s.ln() })
}

/// Solve `P^q(z) = target` near `seed`.
fn pull_back(p: &Poly, q: u32, target: Complex, seed: Complex) -> Result<Complex> {
    let mut z = seed;
    for _ in 0..NEWTON_ITERS {
        let (v, dv) = p.iterate(z, q);
        if dv.norm() == 0.0 {
            return Err(Error::NewtonDivergence { t: 0.0 });
        }
        let step = (v - target) / dv;
        z -= step;
        if !crate::cplx::is_finite(z) {
            break;
        }
        if step.norm() <= 1e-15 * z.norm().max(1e-300) {
            return Ok(z);
        }
    }
    Err(Error::NewtonDivergence { t: 0.0 })
}

fn landing_test(samples: &[(f64, Complex)], candidates: &[Complex], tol: f64) -> Option<Complex> {
    if samples.len() < LANDING_WINDOW {
        return None;
    }
    let last = samples.last().unwrap().1;
    let c = *candidates
        .iter()
        .min_by(|a, b| (*a - last).norm().total_cmp(&(*b - last).norm()))?;
    let window = &samples[samples.len() - LANDING_WINDOW..];
    let dists: Vec<f64> = window.iter().map(|s| (s.1 - c).norm()).collect();
    let within = dists.iter().all(|d| *d <= tol);
    let monotone = dists.windows(2).all(|w| w[1] <= w[0]);
    (within && monotone).then_some(c)
}

/// The candidate the deepest samples of the ray converge to, if the last
/// [`LANDING_WINDOW`] samples are within `tol` of it and approach it
/// monotonically.
pub fn landing_point(ray: &RayTail, candidates: &[Complex], tol: f64) -> Option<Complex> {
    landing_test(&ray.samples, candidates, tol)
}

fn tree(points: &[Complex]) -> RTree<[f64; 2]> {
    RTree::bulk_load(points.iter().map(|z| [z.re, z.im]).collect())
}

fn directed(from: &[Complex], to: &RTree<[f64; 2]>) -> f64 {
    from.iter()
        .map(|z| {
            let n = to.nearest_neighbor(&[z.re, z.im]).expect("nonempty tree");
            (z - Complex::new(n[0], n[1])).norm()
        })
        .fold(0.0_f64, f64::max)
}

/// Hausdorff distance between the compactified sample clouds.
pub fn hausdorff_distance(a: &RayTail, b: &RayTail) -> Result<f64> {
    let pa = a.compactified();
    let pb = b.compactified();
    if pa.is_empty() || pb.is_empty() {
        return Err(Error::EmptyRay);
    }
    Ok(directed(&pa, &tree(&pb)).max(directed(&pb, &tree(&pa))))
}

/// `max |z_A(t) - z_B(t)|` over the shared part of the grid, plus the landing
/// points when both rays land.
pub fn uniform_parameter_distance(a: &RayTail, b: &RayTail) -> Result<f64> {
    if a.samples.is_empty() || b.samples.is_empty() {
        return Err(Error::EmptyRay);
    }
    if (a.dt - b.dt).abs() > 1e-15 || a.samples[0].0 != b.samples[0].0 {
        return Err(Error::GridMismatch);
    }
    let mut d = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x.1 - y.1).norm())
        .fold(0.0_f64, f64::max);
    if let (Some(x), Some(y)) = (a.landing, b.landing) {
        d = d.max((x - y).norm());
    }
    Ok(d)
}

/// Whether the first passage of the ray through `D(center, r)` separates the
/// fixed points lying in the closed disk.
pub fn detect_gate_crossing(ray: &RayTail, fixed_points: &[Complex], center: Complex, r: f64) -> Result<bool> {
    let pts: Vec<Complex> = ray.points().collect();
    if pts.is_empty() {
        return Err(Error::EmptyRay);
    }
    let inside = |z: Complex| (z - center).norm() < r;
    if let Some(l) = ray.landing {
        if inside(l) {
            return Err(Error::RayLandsInside { landing: l });
        }
    }
    let entry = (1..pts.len()).find(|&k| inside(pts[k]) && !inside(pts[k - 1])).ok_or(Error::RayMissesDisk)?;
    let exit = (entry + 1..pts.len())
        .find(|&k| !inside(pts[k]))
        .ok_or(Error::RayLandsInside { landing: *pts.last().unwrap() })?;
    let a = circle_crossing(pts[entry - 1], pts[entry], center, r);
    let b = circle_crossing(pts[exit - 1], pts[exit], center, r);
    // close the arc along a slightly larger circle from b back to a
    let big = r * (1.0 + 1e-6);
    let mut poly = vec![a];
    poly.extend_from_slice(&pts[entry..exit]);
    poly.push(b);
    let tb = (b - center).arg();
    let mut ta = (a - center).arg();
    if ta <= tb {
        ta += TAU;
    }
    let n = 512;
    for j in 0..=n {
        let th = tb + (ta - tb) * j as f64 / n as f64;
        poly.push(center + Complex::from_polar(big, th));
    }
    let members: Vec<Complex> = fixed_points
        .iter()
        .copied()
        .filter(|p| (p - center).norm() <= r * (1.0 + 1e-9))
        .collect();
    let sides: Vec<bool> = members.iter().map(|p| winding(&poly, *p) != 0).collect();
    Ok(sides.iter().any(|s| *s) && sides.iter().any(|s| !*s))
}

fn circle_crossing(outside: Complex, inside: Complex, center: Complex, r: f64) -> Complex {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ((outside + (inside - outside) * mid) - center).norm() < r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    outside + (inside - outside) * hi
}

/// Winding number of the closed polygon `poly` (last vertex joined to the
/// first) about `p`.
pub fn winding(poly: &[Complex], p: Complex) -> i64 {
    let mut total = 0.0;
    for k in 0..poly.len() {
        let a = poly[k] - p;
        let b = poly[(k + 1) % poly.len()] - p;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::c;

    fn quad(c0: f64) -> AnalyticMap {
        AnalyticMap::real_polynomial(&[c0, 0.0, 1.0], 1e6).unwrap()
    }

    #[test]
    fn green_examples() {
        assert!((green_potential(&quad(0.0), c(2.0, 0.0)).unwrap() - 2f64.ln()).abs() < 1e-14);
        let want = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let g = green_potential(&quad(-2.0), c(3.0, 0.0)).unwrap();
        assert!(((g - want) / want).abs() < 1e-10);
        assert!(matches!(green_potential(&quad(0.25), c(0.5, 0.0)), Err(Error::NonEscaping { .. })));
    }

    #[test]
    fn angle_arithmetic() {
        let a = RayAngle::new(1, 3).unwrap();
        assert!(a.has_period(2, 2));
        assert!(!a.has_period(2, 1));
        assert_eq!(a.multiplied(2, 1), RayAngle::new(2, 3).unwrap());
    }

    #[test]
    fn straight_ray_of_z_squared() {
        let ray = trace_ray(&quad(0.0), RayAngle::new(0, 1).unwrap(), 1, -8.0, DEFAULT_DT).unwrap();
        for (t, z) in &ray.samples {
            assert!(z.im.abs() < 1e-12 && z.re > 1.0);
            let want = (2f64.powf(*t)).exp();
            assert!((z.re - want).abs() < 1e-10 * want, "{t} {z}");
        }
        assert_eq!(landing_point(&ray, &[c(1.0, 0.0)], 1e-2), Some(c(1.0, 0.0)));
    }

    #[test]
    fn chebyshev_ray_lands_at_two() {
        let opts = RayOptions { t_min: -200.0, ..Default::default() };
        let ray = trace_ray_partial(&quad(-2.0), RayAngle::new(0, 1).unwrap(), 1, &opts).unwrap();
        assert_eq!(ray.termination, RayTermination::Landed);
        assert!((ray.landing.unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        for (_, z) in &ray.samples {
            assert!(z.re >= 2.0 - 1e-12);
        }
    }

    #[test]
    fn ray_lands_at_repelling_point() {
        let opts = RayOptions { t_min: -200.0, ..Default::default() };
        let ray = trace_ray_partial(&quad(0.24), RayAngle::new(0, 1).unwrap(), 1, &opts).unwrap();
        assert!((ray.landing.unwrap() - c(0.6, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn invariance_and_potential_along_period_two_ray() {
        let map = AnalyticMap::polynomial(vec![c(-0.12, 0.75), c(0.0, 0.0), c(1.0, 0.0)], 1e6).unwrap();
        let ray = trace_ray(&map, RayAngle::new(1, 3).unwrap(), 2, -3.0, DEFAULT_DT).unwrap();
        let p = Poly::new(&map).unwrap();
        let m = 32;
        for k in 0..ray.samples.len() - m {
            let (t, z) = ray.samples[k + m];
            let img = p.iterate(z, 2).0;
            assert!((img - ray.samples[k].1).norm() < 1e-6, "t = {t}");
            let g = green_potential(&map, z).unwrap();
            let want = 4f64.powf(t);
            assert!(((g - want) / want).abs() < 1e-6);
        }
    }

    #[test]
    fn synthetic_distances() {
        let pts: Vec<Complex> = (0..50).map(|k| c(1.0 + k as f64 * 0.01, 0.0)).collect();
        let a = RayTail::from_points(&pts, DEFAULT_DT, None).unwrap();
        let shifted: Vec<Complex> = pts.iter().map(|z| z + c(0.0, 0.01)).collect();
        let b = RayTail::from_points(&shifted, DEFAULT_DT, None).unwrap();
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.01).abs() < 1e-12);
        assert!((uniform_parameter_distance(&a, &b).unwrap() - 0.01).abs() < 1e-15);
        let coarse = RayTail::from_points(&pts, 1.0 / 16.0, None).unwrap();
        assert!(matches!(uniform_parameter_distance(&a, &coarse), Err(Error::GridMismatch)));
    }

    #[test]
    fn synthetic_gate() {
        // a horizontal chord through the unit disk
        let pts: Vec<Complex> = (0..=40).map(|k| c(2.0 - 0.1 * k as f64, 0.3)).collect();
        let ray = RayTail::from_points(&pts, DEFAULT_DT, None).unwrap();
        let zero = c(0.0, 0.0);
        assert!(detect_gate_crossing(&ray, &[c(0.0, 0.5), c(0.0, -0.5)], zero, 1.0).unwrap());
        assert!(!detect_gate_crossing(&ray, &[c(0.0, 0.0), c(0.2, -0.5)], zero, 1.0).unwrap());
        let far: Vec<Complex> = (0..10).map(|k| c(5.0 + k as f64, 0.0)).collect();
        let ray = RayTail::from_points(&far, DEFAULT_DT, None).unwrap();
        assert!(matches!(detect_gate_crossing(&ray, &[zero], zero, 1.0), Err(Error::RayMissesDisk)));
    }
}
