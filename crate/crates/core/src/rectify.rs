//! Rectifying coordinates by path integration, the lifted dynamics
//! `F: Z -> Z + 1 + u_f` and the cone estimate over parameter families.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::buffform::{residue_closed_form, BuffForm};
use crate::cplx::{angle_distance, TWO_PI_I};
use crate::fixpoint;
use crate::germ::AnalyticMap;
use crate::{Complex, Error, Result};

/// Largest `|Delta Z|` allowed between consecutive samples of a lift.
pub const LIFT_STEP: f64 = 0.1;
const MAX_LIFT_DEPTH: u32 = 40;

/// A polygonal path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPolyline {
    vertices: Vec<Complex>,
}

impl PathPolyline {
    /// Repeated consecutive vertices are merged, so `[z, z]` is the
    /// one-point path.
    pub fn new(vertices: Vec<Complex>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument("a path needs at least two vertices".into()));
        }
        if vertices.iter().any(|z| !crate::cplx::is_finite(*z)) {
            return Err(Error::NonFinite("building a path"));
        }
        let mut v: Vec<Complex> = Vec::with_capacity(vertices.len());
        for z in vertices {
            if v.last() != Some(&z) {
                v.push(z);
            }
        }
        Ok(PathPolyline { vertices: v })
    }

    pub fn segment(a: Complex, b: Complex) -> Result<Self> {
        Self::new(vec![a, b])
    }

    /// Closed `n`-gon inscribed in `|z - center| = radius`, counterclockwise
    /// from angle `start`.
    pub fn circle(center: Complex, radius: f64, n: usize, start: f64) -> Result<Self> {
        if n < 3 || !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("circle with {n} vertices and radius {radius}")));
        }
        let v = (0..=n)
            .map(|k| {
                let th = if k == n { start + TAU } else { start + TAU * k as f64 / n as f64 };
                center + Complex::from_polar(radius, th)
            })
            .collect();
        Self::new(v)
    }

    pub fn vertices(&self) -> &[Complex] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        let (a, b) = (self.vertices[0], *self.vertices.last().unwrap());
        (a - b).norm() <= 1e-12 * a.norm().max(1.0)
    }
}

/// A path together with the values of a branch of the rectifying
/// coordinate along a refinement of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftedPath {
    pub base: PathPolyline,
    /// Refined vertices; `values[k]` is the lift of `points[k]`.
    pub points: Vec<Complex>,
    pub values: Vec<Complex>,
    pub start_value: Complex,
}

impl LiftedPath {
    pub fn end_value(&self) -> Complex {
        *self.values.last().unwrap()
    }

    pub fn translation(&self) -> Complex {
        self.end_value() - self.start_value
    }
}

/// Integral of `omega_f` along a polyline.
pub fn integrate_path(form: &BuffForm, path: &PathPolyline) -> Result<Complex> {
    path.vertices
        .windows(2)
        .map(|w| form.segment_integral(w[0], w[1]))
        .sum()
}

/// Continue the rectifying coordinate along `path` from `start_value`.
pub fn lift_path(form: &BuffForm, path: &PathPolyline, start_value: Complex) -> Result<LiftedPath> {
    lift_path_with_step(form, path, start_value, LIFT_STEP)
}

/// [`lift_path`] with a custom cap on `|Delta Z|` between samples.
pub fn lift_path_with_step(form: &BuffForm, path: &PathPolyline, start_value: Complex, max_step: f64) -> Result<LiftedPath> {
    if !(max_step > 0.0) {
        return Err(Error::InvalidArgument(format!("lift step {max_step}")));
    }
    let mut points = vec![path.vertices[0]];
    let mut values = vec![start_value];
    for w in path.vertices.windows(2) {
        let whole = form.segment_integral(w[0], w[1])?;
        refine(form, w[0], w[1], whole, max_step, 0, &mut points, &mut values)?;
    }
    Ok(LiftedPath { base: path.clone(), points, values, start_value })
}

#[allow(clippy::too_many_arguments)]
fn refine(
    form: &BuffForm,
    a: Complex,
    b: Complex,
    integral: Complex,
    max_step: f64,
    depth: u32,
    points: &mut Vec<Complex>,
    values: &mut Vec<Complex>,
) -> Result<()> {
    if integral.norm() <= max_step || depth >= MAX_LIFT_DEPTH {
        let z = *values.last().unwrap() + integral;
        points.push(b);
        values.push(z);
        return Ok(());
    }
    let m = 0.5 * (a + b);
    let left = form.segment_integral(a, m)?;
    refine(form, a, m, left, max_step, depth + 1, points, values)?;
    refine(form, m, b, integral - left, max_step, depth + 1, points, values)
}

/// The record of the fixed point at `p`.
fn record_at(form: &BuffForm, p: Complex) -> Result<&fixpoint::FixedPointRecord> {
    form.fixed_points()
        .iter()
        .find(|r| (r.location - p).norm() <= 1e-9 * r.location.norm().max(1.0))
        .ok_or_else(|| Error::InvalidArgument(format!("{p} is not a fixed point of the form")))
}

/// `2 pi i res(omega_f, p)`: the change of `Z` along one positive loop about `p`.
pub fn monodromy(form: &BuffForm, p: Complex) -> Result<Complex> {
    Ok(TWO_PI_I * residue_closed_form(record_at(form, p)?)?)
}

fn reject_fixed(form: &BuffForm, z: Complex) -> Result<()> {
    if form.is_fixed(z) {
        return Err(Error::FixedPointInput { z });
    }
    if let Some((pole, distance)) = form.nearest_fixed_point(z) {
        if distance < form.pole_guard() {
            return Err(Error::PoleProximity { z, pole, distance });
        }
    }
    Ok(())
}

/// One step of the lifted dynamics: `(f(z), Z + 1 + u_f(z))`.
pub fn lifted_step(form: &BuffForm, z: Complex, big_z: Complex) -> Result<(Complex, Complex)> {
    reject_fixed(form, z)?;
    let next = form.map().evaluate(z)?;
    Ok((next, big_z + 1.0 + form.u_f(z)?))
}

/// Inverse step: `z_prev = f^{-1}(z)` near `seed` and `Z_prev = Z - 1 + u_hat`
/// where `u_hat = 1 + integral of omega over [z, z_prev] = -u_f(z_prev)`.
pub fn lifted_step_inverse(form: &BuffForm, z: Complex, big_z: Complex, seed: Complex) -> Result<(Complex, Complex)> {
    reject_fixed(form, z)?;
    let prev = form.map().local_inverse(z, seed)?;
    reject_fixed(form, prev)?;
    let u_hat = -form.u_f(prev)?;
    Ok((prev, big_z - 1.0 + u_hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSpec {
    pub apex: Complex,
    pub epsilon: f64,
    pub sign: ConeSign,
}

impl ConeSpec {
    pub fn new(apex: Complex, epsilon: f64, sign: ConeSign) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(ConeSpec { apex, epsilon, sign })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon = {epsilon} must lie in (0, 1)")))
    }
}

/// Membership in the cone of half-angle `asin(epsilon)` about the positive
/// (plus) or negative (minus) real direction at the apex.
pub fn cone_contains(cone: &ConeSpec, point: Complex) -> bool {
    let d = point - cone.apex;
    if d.norm() == 0.0 {
        return false;
    }
    let half = cone.epsilon.asin();
    let axis = match cone.sign {
        ConeSign::Plus => 0.0,
        ConeSign::Minus => PI,
    };
    angle_distance(d.arg(), axis) < half
}

/// Sampling parameters for [`verify_theorem_a`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepGrid {
    pub angles: usize,
    pub radii: usize,
    pub t_steps: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid { angles: 24, radii: 12, t_steps: 16 }
    }
}

impl SweepGrid {
    pub fn points(&self, r: f64) -> Vec<Complex> {
        let mut out = Vec::with_capacity(self.angles * self.radii);
        for i in 1..=self.radii {
            let rho = r * i as f64 / self.radii as f64;
            // stagger alternate rings to avoid lining up with the real axis
            let offset = if i % 2 == 0 { 0.5 } else { 0.0 };
            for k in 0..self.angles {
                let th = TAU * (k as f64 + offset) / self.angles as f64;
                out.push(Complex::from_polar(rho, th));
            }
        }
        out
    }

    pub fn ts(&self) -> Vec<f64> {
        (1..=self.t_steps).map(|k| k as f64 / self.t_steps as f64).collect()
    }
}

/// Largest values of `|u_{f,t}(z)| / t` and of its inverse-branch analogue
/// `|t + integral of omega over [z, z_hat_t]| / t` over a disk grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeRatios {
    pub forward: f64,
    pub backward: f64,
    pub points: usize,
}

impl ConeRatios {
    pub fn max(&self) -> f64 {
        self.forward.max(self.backward)
    }
}

fn point_ratios(form: &BuffForm, z: Complex, ts: &[f64]) -> Result<(f64, f64)> {
    let fwd = form
        .u_f_t_samples(z, ts)?
        .iter()
        .zip(ts)
        .map(|(u, t)| u.norm() / t)
        .fold(0.0_f64, f64::max);
    let w = form.map().local_inverse(z, z)?;
    let mut acc = Complex::new(0.0, 0.0);
    let mut prev = z;
    let mut bwd = 0.0_f64;
    for &t in ts {
        let zt = z + (w - z) * t;
        acc += form.segment_integral(prev, zt)?;
        bwd = bwd.max((acc + t).norm() / t);
        prev = zt;
    }
    Ok((fwd, bwd))
}

/// Cone ratios of one Buff form on the grid of `D(0, r)`, skipping points
/// within twice the pole guard of a fixed point.
pub fn cone_ratios(form: &BuffForm, r: f64, grid: &SweepGrid) -> Result<ConeRatios> {
    let ts = grid.ts();
    let pts: Vec<Complex> = grid
        .points(r)
        .into_iter()
        .filter(|z| form.nearest_fixed_point(*z).is_none_or(|(_, d)| d >= 2.0 * form.pole_guard()))
        .collect();
    let results = map_points(&pts, |z| point_ratios(form, z, &ts));
    let mut out = ConeRatios { forward: 0.0, backward: 0.0, points: pts.len() };
    for res in results {
        let (f, b) = res?;
        out.forward = out.forward.max(f);
        out.backward = out.backward.max(b);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn map_points<T: Send, F: Fn(Complex) -> T + Sync>(pts: &[Complex], f: F) -> Vec<T> {
    use rayon::prelude::*;
    pts.par_iter().map(|z| f(*z)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<T, F: Fn(Complex) -> T>(pts: &[Complex], f: F) -> Vec<T> {
    pts.iter().map(|z| f(*z)).collect()
}

/// Per-radius outcome of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSweep {
    pub radius: f64,
    /// Cone ratios of each family member, in family order.
    pub members: Vec<ConeRatios>,
    /// First family index from which every member stays below epsilon.
    pub start_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremAReport {
    pub epsilon: f64,
    pub radius_found: f64,
    pub family_index_start: usize,
    pub grid_size: usize,
    pub t_samples: usize,
    pub max_ratio: f64,
    pub max_forward: f64,
    pub max_backward: f64,
    pub pass: bool,
    pub sweeps: Vec<RadiusSweep>,
}

/// Search the candidate radii in descending order for one on which every
/// family member from some index on satisfies `|u_{n,t}| < epsilon t` in
/// both directions. Each member is considered on its own validity disk,
/// which must contain exactly as many fixed points (with multiplicity) as
/// the limit map has at 0.
pub fn verify_theorem_a(
    limit_map: &AnalyticMap,
    family: &[AnalyticMap],
    q: u32,
    epsilon: f64,
    radii: &[f64],
    grid: &SweepGrid,
) -> Result<TheoremAReport> {
    check_epsilon(epsilon)?;
    if family.len() < 2 {
        return Err(Error::FamilyTooShort(format!("{} members", family.len())));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive and nonempty".into()));
    }
    let m = fixpoint::multiplicity(limit_map, Complex::new(0.0, 0.0))?;
    if m != q + 1 {
        return Err(Error::WrongFixedPointCount { expected: q as usize + 1, found: m as usize });
    }
    let forms = family
        .iter()
        .map(|f| {
            let form = BuffForm::new(f.clone())?;
            let found: u32 = form.fixed_points().iter().map(|r| r.multiplicity).sum();
            if found != q + 1 {
                return Err(Error::WrongFixedPointCount { expected: q as usize + 1, found: found as usize });
            }
            Ok(form)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut sweeps = Vec::new();
    let mut found = None;
    for &r in &sorted {
        let members = forms.iter().map(|form| cone_ratios(form, r, grid)).collect::<Result<Vec<_>>>()?;
        let start = members.iter().rposition(|c| c.max() >= epsilon).map_or(Some(0), |i| {
            (i + 1 < members.len()).then_some(i + 1)
        });
        sweeps.push(RadiusSweep { radius: r, members, start_index: start });
        if let Some(s) = start {
            found = Some((r, s, sweeps.len() - 1));
            break;
        }
    }
    let grid_size = grid.angles * grid.radii;
    Ok(match found {
        Some((r, s, k)) => {
            let tail = &sweeps[k].members[s..];
            let fwd = tail.iter().map(|c| c.forward).fold(0.0, f64::max);
            let bwd = tail.iter().map(|c| c.backward).fold(0.0, f64::max);
            TheoremAReport {
                epsilon,
                radius_found: r,
                family_index_start: s,
                grid_size,
                t_samples: grid.t_steps,
                max_ratio: fwd.max(bwd),
                max_forward: fwd,
                max_backward: bwd,
                pass: fwd.max(bwd) < epsilon,
                sweeps,
            }
        }
        None => {
            let last = sweeps.last().unwrap();
            let fwd = last.members.iter().map(|c| c.forward).fold(0.0, f64::max);
            let bwd = last.members.iter().map(|c| c.backward).fold(0.0, f64::max);
            TheoremAReport {
                epsilon,
                radius_found: 0.0,
                family_index_start: family.len(),
                grid_size,
                t_samples: grid.t_steps,
                max_ratio: fwd.max(bwd),
                max_forward: fwd,
                max_backward: bwd,
                pass: false,
                sweeps,
            }
        }
    })
}
