//! Real-time trajectories of Buff fields and their rotations, the normal-form
//! coordinate, curvature of lifted circles and closed orbits.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::buffform::{residue_closed_form, BuffForm};
use crate::cplx::{principal_log, TWO_PI_I};
use crate::rectify::PathPolyline;
use crate::{Complex, Error, Result};

pub const RTOL: f64 = 1e-9;
pub const ATOL: f64 = 1e-12;
/// Closing tolerance for a trajectory loop.
pub const LOOP_CLOSE_TOL: f64 = 1e-3;
/// Resolution of the canonical-neighborhood bisection.
pub const REACH_TOL: f64 = 1e-4;

/// A holomorphic vector field `dz/dt = field(z)`.
pub trait VectorField: Sync {
    fn value(&self, z: Complex) -> Result<Complex>;
    /// Zeros of the field that trajectories should stop short of.
    fn singularities(&self) -> Vec<Complex>;
    /// Residue of the dual form `dz / field` at the singularity `p`.
    fn dual_residue(&self, p: Complex) -> Result<Complex>;
}

/// `alpha * chi_f`.
#[derive(Debug, Clone, Copy)]
pub struct RotatedBuff<'a> {
    pub form: &'a BuffForm,
    pub alpha: Complex,
}

impl<'a> RotatedBuff<'a> {
    pub fn new(form: &'a BuffForm, alpha: Complex) -> Result<Self> {
        check_unit(alpha)?;
        Ok(RotatedBuff { form, alpha })
    }
}

impl VectorField for RotatedBuff<'_> {
    fn value(&self, z: Complex) -> Result<Complex> {
        Ok(self.alpha * self.form.chi(z)?)
    }

    fn singularities(&self) -> Vec<Complex> {
        self.form.fixed_points().iter().map(|r| r.location).collect()
    }

    fn dual_residue(&self, p: Complex) -> Result<Complex> {
        let rec = self
            .form
            .fixed_points()
            .iter()
            .find(|r| (r.location - p).norm() <= 1e-9 * r.location.norm().max(1.0))
            .ok_or_else(|| Error::InvalidArgument(format!("{p} is not a fixed point")))?;
        Ok(residue_closed_form(rec)? / self.alpha)
    }
}

/// `a (z - center)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearField {
    pub a: Complex,
    pub center: Complex,
}

impl VectorField for LinearField {
    fn value(&self, z: Complex) -> Result<Complex> {
        Ok(self.a * (z - self.center))
    }

    fn singularities(&self) -> Vec<Complex> {
        vec![self.center]
    }

    fn dual_residue(&self, p: Complex) -> Result<Complex> {
        if p != self.center {
            return Err(Error::InvalidArgument(format!("{p} is not the center")));
        }
        Ok(Complex::new(1.0, 0.0) / self.a)
    }
}

/// `alpha * w^m / (1 + c w^(m-1))`, dual to the normal-form coordinate.
#[derive(Debug, Clone, Copy)]
pub struct NormalFormField {
    pub m: u32,
    pub c: Complex,
    pub alpha: Complex,
}

impl VectorField for NormalFormField {
    fn value(&self, w: Complex) -> Result<Complex> {
        let wm1 = w.powu(self.m - 1);
        let den = Complex::new(1.0, 0.0) + self.c * wm1;
        if den.norm() == 0.0 {
            return Err(Error::NonFinite("normal-form field at a pole"));
        }
        Ok(self.alpha * wm1 * w / den)
    }

    fn singularities(&self) -> Vec<Complex> {
        vec![Complex::new(0.0, 0.0)]
    }

    fn dual_residue(&self, p: Complex) -> Result<Complex> {
        if p != Complex::new(0.0, 0.0) {
            return Err(Error::InvalidArgument(format!("{p} is not a singularity")));
        }
        Ok(self.c / self.alpha)
    }
}

fn check_unit(alpha: Complex) -> Result<()> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("direction {alpha} is not of modulus 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySpec {
    /// Extra rotation applied on top of the field.
    pub direction: Complex,
    pub t_max: f64,
    /// Initial and largest step.
    pub step: f64,
    pub stop_radius: f64,
}

impl TrajectorySpec {
    pub fn new(direction: Complex, t_max: f64, step: f64, stop_radius: f64) -> Result<Self> {
        check_unit(direction)?;
        if !(t_max > 0.0) || !(step > 0.0) || !(stop_radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("trajectory spec t_max={t_max} step={step} stop={stop_radius}")));
        }
        Ok(TrajectorySpec { direction, t_max, step, stop_radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    LeftDomain,
    NearSingularity,
    /// Step size underflowed, typically next to a pole of the field.
    TerminatedAtSingularity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Complex>,
    /// Field values at the points, used for dense output.
    #[serde(skip)]
    pub velocities: Vec<Complex>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn path(&self) -> Result<PathPolyline> {
        if self.points.len() < 2 {
            return PathPolyline::new(vec![self.points[0], self.points[0]]);
        }
        PathPolyline::new(self.points.clone())
    }

    pub fn end(&self) -> Complex {
        *self.points.last().unwrap()
    }

    /// Cubic Hermite interpolant on step `k` at fraction `s`.
    pub fn dense(&self, k: usize, s: f64) -> Complex {
        let h = self.times[k + 1] - self.times[k];
        let (y0, y1) = (self.points[k], self.points[k + 1]);
        let (v0, v1) = (self.velocities[k] * h, self.velocities[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0) + v0 * (s3 - 2.0 * s2 + s) + y1 * (-2.0 * s3 + 3.0 * s2) + v1 * (s3 - s2)
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

enum StepOutcome {
    Accepted { y: Complex, v: Complex, err: f64 },
    Rejected { err: f64 },
    Failed(Error),
}

fn dp_step<F: Fn(Complex) -> Result<Complex>>(f: &F, y: Complex, k1: Complex, h: f64) -> StepOutcome {
    let mut k = [Complex::new(0.0, 0.0); 7];
    k[0] = k1;
    for s in 1..7 {
        let mut acc = y;
        for (j, a) in A[s].iter().enumerate().take(s) {
            acc += k[j] * (h * a);
        }
        match f(acc) {
            Ok(v) if crate::cplx::is_finite(v) => k[s] = v,
            Ok(_) => return StepOutcome::Failed(Error::NonFinite("trajectory stage")),
            Err(e) => return StepOutcome::Failed(e),
        }
    }
    // the last stage is evaluated at the 5th order solution
    let y_new = y + (0..6).map(|j| k[j] * (h * A[6][j])).sum::<Complex>();
    let err_vec: Complex = (0..7).map(|j| k[j] * (h * E[j])).sum();
    let scale = ATOL + RTOL * y.norm().max(y_new.norm());
    let err = err_vec.norm() / scale;
    if err <= 1.0 {
        StepOutcome::Accepted { y: y_new, v: k[6], err }
    } else {
        StepOutcome::Rejected { err }
    }
}

/// Integrate `dz/dt = direction * field(z)` from `z0` with Dormand-Prince 4(5).
pub fn trajectory<V: VectorField + ?Sized>(field: &V, z0: Complex, spec: &TrajectorySpec) -> Result<Trajectory> {
    let singular = field.singularities();
    let near = |z: Complex| singular.iter().any(|p| (z - p).norm() <= spec.stop_radius);
    let f = |z: Complex| field.value(z).map(|v| v * spec.direction);
    if near(z0) || singular.contains(&z0) {
        return Err(Error::FixedPointInput { z: z0 });
    }
    let v0 = f(z0)?;
    let mut out = Trajectory { times: vec![0.0], points: vec![z0], velocities: vec![v0], status: TrajectoryStatus::Completed };
    let (mut t, mut y, mut v) = (0.0, z0, v0);
    let mut h = spec.step.min(spec.t_max);
    loop {
        if t >= spec.t_max * (1.0 - 1e-14) {
            break;
        }
        h = h.min(spec.t_max - t);
        if h < 1e-14 * t.abs().max(1.0) {
            out.status = TrajectoryStatus::TerminatedAtSingularity;
            break;
        }
        match dp_step(&f, y, v, h) {
            StepOutcome::Accepted { y: yn, v: vn, err } => {
                t += h;
                y = yn;
                v = vn;
                out.times.push(t);
                out.points.push(y);
                out.velocities.push(v);
                if near(y) {
                    out.status = TrajectoryStatus::NearSingularity;
                    break;
                }
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * grow).min(spec.step);
            }
            StepOutcome::Rejected { err } => {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            StepOutcome::Failed(Error::DomainExceeded { .. }) => {
                out.status = TrajectoryStatus::LeftDomain;
                break;
            }
            StepOutcome::Failed(_) => h *= 0.25,
        }
    }
    Ok(out)
}

/// `-1/((m-1) w^(m-1)) + c Log w`.
pub fn normal_form_phi0(m: u32, c: Complex, w: Complex) -> Result<Complex> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("normal form needs m >= 2, got {m}")));
    }
    if w.norm() == 0.0 {
        return Err(Error::FixedPointInput { z: w });
    }
    let pole = -Complex::new(1.0, 0.0) / (w.powu(m - 1) * (m - 1) as f64);
    if c == Complex::new(0.0, 0.0) {
        return Ok(pole);
    }
    Ok(pole + c * principal_log(w)?)
}

/// The normal-form one-form `(1 + c w^(m-1)) / w^m`.
pub fn normal_form_omega0(m: u32, c: Complex, w: Complex) -> Complex {
    (Complex::new(1.0, 0.0) + c * w.powu(m - 1)) / w.powu(m)
}

/// Signed curvature of the image of a counterclockwise circle under a
/// primitive of `omega`, at the point `z`.
pub fn lift_curvature(z: Complex, omega: Complex, omega_prime: Complex) -> f64 {
    (Complex::new(1.0, 0.0) + z * omega_prime / omega).re / (z * omega).norm()
}

/// Curvature of the lift of `|z| = r` at angle `theta`.
pub fn circle_lift_curvature(form: &BuffForm, r: f64, theta: f64) -> Result<f64> {
    let z = Complex::from_polar(r, theta);
    Ok(lift_curvature(z, form.omega(z)?, form.omega_derivative(z)?))
}

/// Three-point signed curvature of a polyline at its middle vertex.
pub fn discrete_curvature(a: Complex, b: Complex, c: Complex) -> f64 {
    let cross = ((b - a).conj() * (c - b)).im;
    2.0 * cross / ((b - a).norm() * (c - b).norm() * (c - a).norm())
}

/// Lift of the counterclockwise `n`-gon on `|z| = r`, one value per vertex.
pub fn lifted_circle(form: &BuffForm, r: f64, n: usize) -> Result<Vec<Complex>> {
    let circle = PathPolyline::circle(Complex::new(0.0, 0.0), r, n, 0.0)?;
    let v = circle.vertices();
    let mut out = Vec::with_capacity(v.len());
    let mut z = Complex::new(0.0, 0.0);
    out.push(z);
    for w in v.windows(2) {
        z += form.segment_integral(w[0], w[1])?;
        out.push(z);
    }
    Ok(out)
}

/// Outcome of following one trajectory loop around a center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedLoop {
    pub start: Complex,
    pub return_point: Complex,
    pub return_time: f64,
    pub trajectory: Trajectory,
}

/// Follow the trajectory from `start` until it winds once around `p`, timing
/// the crossing of the half-line from `p` through `start`.
pub fn loop_around<V: VectorField + ?Sized>(field: &V, p: Complex, start: Complex, t_max: f64, step: f64) -> Result<Option<ClosedLoop>> {
    let spec = TrajectorySpec::new(Complex::new(1.0, 0.0), t_max, step, 0.0)?;
    let tr = trajectory(field, start, &spec)?;
    let base = start - p;
    let mut wind = 0.0;
    for k in 0..tr.points.len() - 1 {
        let step_angle = ((tr.points[k + 1] - p) / (tr.points[k] - p)).arg();
        let before = wind;
        wind += step_angle;
        if wind.abs() >= TAU && before.abs() < TAU {
            // the angle relative to the start ray changes sign inside this step
            let side = |s: f64| ((tr.dense(k, s) - p) * base.conj()).im;
            let (mut lo, mut hi) = (0.0, 1.0);
            let s_lo = side(lo);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if side(mid).signum() == s_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = 0.5 * (lo + hi);
            let time = tr.times[k] + s * (tr.times[k + 1] - tr.times[k]);
            let point = tr.dense(k, s);
            let mut trajectory = tr;
            trajectory.times.truncate(k + 1);
            trajectory.points.truncate(k + 1);
            trajectory.velocities.truncate(k + 1);
            trajectory.times.push(time);
            trajectory.points.push(point);
            trajectory.velocities.push(field.value(point)?);
            return Ok(Some(ClosedLoop { start, return_point: point, return_time: time, trajectory }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedOrbitPeriod {
    /// `2 pi i res(dz / field, p)`.
    pub tau: Complex,
    pub period: f64,
    /// Return time of a sample loop.
    pub measured: f64,
    pub sample_radius: f64,
}

/// Period of the closed trajectories around a center, from the residue and
/// from one sampled loop.
pub fn closed_orbit_period<V: VectorField + ?Sized>(field: &V, p: Complex, sample_radius: f64) -> Result<ClosedOrbitPeriod> {
    let res = field.dual_residue(p)?;
    if res.re.abs() > 1e-8 * res.norm().max(1.0) {
        return Err(Error::ResidueNotImaginary { residue: res });
    }
    let tau = TWO_PI_I * res;
    let period = tau.re.abs();
    let start = p + Complex::new(sample_radius, 0.0);
    let lp = loop_around(field, p, start, 1.5 * period, period / 256.0)?
        .ok_or_else(|| Error::NoClosedOrbit(format!("no return around {p} from radius {sample_radius}")))?;
    if (lp.return_point - start).norm() > LOOP_CLOSE_TOL {
        return Err(Error::NoClosedOrbit(format!("loop from {start} misses by {}", (lp.return_point - start).norm())));
    }
    Ok(ClosedOrbitPeriod { tau, period, measured: lp.return_time, sample_radius })
}

/// Largest starting distance along the ray `p + rho e^{i ray_angle}` whose
/// trajectory closes up inside `D(disk_center, disk_radius)`, to
/// [`REACH_TOL`].
pub fn canonical_neighborhood_radius<V: VectorField + ?Sized>(
    field: &V,
    p: Complex,
    ray_angle: f64,
    disk_center: Complex,
    disk_radius: f64,
) -> Result<f64> {
    let res = field.dual_residue(p)?;
    if res.re.abs() > 1e-8 * res.norm().max(1.0) {
        return Err(Error::ResidueNotImaginary { residue: res });
    }
    let period = (TWO_PI_I * res).re.abs();
    let dir = Complex::from_polar(1.0, ray_angle);
    // distance from p to the disk boundary along the ray
    let d = p - disk_center;
    let b = (d * dir.conj()).re;
    let hi_max = -b + (b * b - d.norm_sqr() + disk_radius * disk_radius).max(0.0).sqrt();
    if !(hi_max > 0.0) {
        return Err(Error::InvalidArgument(format!("{p} is not inside the disk")));
    }
    let closes = |rho: f64| -> Result<bool> {
        let start = p + dir * rho;
        let lp = match loop_around(field, p, start, 1.5 * period, period / 512.0) {
            Ok(Some(lp)) => lp,
            Ok(None) => return Ok(false),
            Err(Error::FixedPointInput { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let inside = lp.trajectory.points.iter().all(|z| (z - disk_center).norm() < disk_radius);
        Ok(inside && (lp.return_point - start).norm() <= LOOP_CLOSE_TOL)
    };
    let mut lo = hi_max * 1e-3;
    if !closes(lo)? {
        return Err(Error::NoClosedOrbit(format!("no closed loop near {p}")));
    }
    let mut hi = hi_max * (1.0 - 1e-9);
    if closes(hi)? {
        return Ok(hi);
    }
    while hi - lo > REACH_TOL {
        let mid = 0.5 * (lo + hi);
        if closes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `i Lambda / |Lambda|`: the rotation making the residue at a point with
/// parameter `Lambda` purely imaginary with positive period.
pub fn canonical_direction(big_lambda: Complex) -> Result<Complex> {
    if big_lambda.norm() == 0.0 {
        return Err(Error::InvalidArgument("zero residue".into()));
    }
    Ok(crate::cplx::I * big_lambda / big_lambda.norm())
}
