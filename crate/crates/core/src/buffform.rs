//! The Buff form `omega_f = (f' - 1) / ((f - z) Log f') dz`, its dual field
//! `chi_f = 1 / omega_f`, residues and the correction functions `u_f`, `u_{f,t}`.

use crate::cplx::{ensure_finite, log1p_over, principal_log, segment_distance};
use crate::fixpoint::{self, FixedPointRecord};
use crate::germ::AnalyticMap;
use crate::quad::{self, Tolerance};
use crate::{Complex, Error, Result};

/// Default pole guard as a fraction of the validity radius.
pub const POLE_GUARD_FRACTION: f64 = 1e-4;
/// Accuracy target of numeric residues.
pub const RESIDUE_TOL: f64 = 1e-10;
/// Quadrature tolerance for the integrals defining `u_f`.
pub const U_TOL: Tolerance = Tolerance { rel: 1e-10, abs: 1e-15 };
/// Points this close to a located fixed point are treated as fixed.
pub const FIXED_TOL: f64 = 1e-12;
/// Taylor terms kept in the local model of `u_f` at a parabolic point.
const MODEL_TERMS: usize = 40;

/// Taylor expansion of `u_f` about a multiple fixed point, built from values
/// on a circle where direct quadrature is well conditioned. Used inside a
/// quarter of that circle, where `u_f` is far below double-precision noise
/// of the direct integral.
#[derive(Debug, Clone)]
struct LocalModel {
    center: Complex,
    reach: f64,
    coefficients: Vec<Complex>,
}

impl LocalModel {
    fn eval(&self, z: Complex) -> Complex {
        let h = z - self.center;
        self.coefficients.iter().rev().fold(Complex::new(0.0, 0.0), |acc, c| acc * h + c)
    }
}

#[derive(Debug, Clone)]
pub struct BuffForm {
    map: AnalyticMap,
    fixed_points: Vec<FixedPointRecord>,
    pole_guard: f64,
    models: Vec<LocalModel>,
}

impl BuffForm {
    /// Buff form of `map` on its validity disk.
    pub fn new(map: AnalyticMap) -> Result<Self> {
        let fixed_points = fixpoint::find_fixed_points(&map, map.validity_radius())?;
        Self::with_fixed_points(map, fixed_points)
    }

    /// Buff form with precomputed fixed points.
    pub fn with_fixed_points(map: AnalyticMap, fixed_points: Vec<FixedPointRecord>) -> Result<Self> {
        let pole_guard = POLE_GUARD_FRACTION * map.validity_radius();
        let mut form = BuffForm { map, fixed_points, pole_guard, models: Vec::new() };
        let mut models = Vec::new();
        for rec in form.fixed_points.iter().filter(|r| r.is_parabolic()) {
            models.push(form.build_model(rec)?);
        }
        form.models = models;
        Ok(form)
    }

    pub fn map(&self) -> &AnalyticMap {
        &self.map
    }

    pub fn fixed_points(&self) -> &[FixedPointRecord] {
        &self.fixed_points
    }

    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }

    /// Distance from `z` to the nearest fixed point and that point.
    pub fn nearest_fixed_point(&self, z: Complex) -> Option<(Complex, f64)> {
        self.fixed_points
            .iter()
            .map(|r| (r.location, (r.location - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn build_model(&self, rec: &FixedPointRecord) -> Result<LocalModel> {
        let p = rec.location;
        let spacing = self
            .fixed_points
            .iter()
            .map(|r| (r.location - p).norm())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let radius = (0.4 * spacing).min(0.25 * (self.map.validity_radius() - p.norm())).min(0.1);
        let u = |z: Complex| self.u_f_direct(z);
        let mut coefficients = quad::cauchy_coefficients(&u, p, radius, MODEL_TERMS, 1e-12)?;
        // zero of order 2q, q = multiplicity - 1
        let order = 2 * (rec.multiplicity as usize - 1);
        for c in coefficients.iter_mut().take(order) {
            *c = Complex::new(0.0, 0.0);
        }
        Ok(LocalModel { center: p, reach: radius / 4.0, coefficients })
    }

    fn check_point(&self, z: Complex, d1: Complex) -> Result<()> {
        let fp = Complex::new(1.0, 0.0) + d1;
        if fp.re <= 0.0 {
            return Err(Error::PositivityViolated { z, re_derivative: fp.re });
        }
        principal_log(fp)?;
        Ok(())
    }

    /// `chi_f(z)` and `chi_f'(z)`.
    pub fn chi_jet(&self, z: Complex) -> Result<(Complex, Complex)> {
        let j = self.map.displacement_jet(z)?;
        self.check_point(z, j.d1)?;
        let l = log1p_over(j.d1)?;
        let chi = j.value * l;
        let dchi = j.d1 * l + j.value * log1p_over_derivative(j.d1, l) * j.d2;
        Ok((ensure_finite(chi, "evaluating chi")?, ensure_finite(dchi, "differentiating chi")?))
    }

    /// The Buff vector field, zero at the fixed points.
    pub fn chi(&self, z: Complex) -> Result<Complex> {
        let j = self.map.displacement_jet(z)?;
        self.check_point(z, j.d1)?;
        ensure_finite(j.value * log1p_over(j.d1)?, "evaluating chi")
    }

    fn guard(&self, z: Complex) -> Result<()> {
        if let Some((pole, distance)) = self.nearest_fixed_point(z) {
            if distance < self.pole_guard {
                return Err(Error::PoleProximity { z, pole, distance });
            }
        }
        Ok(())
    }

    /// The coefficient of the Buff form.
    pub fn omega(&self, z: Complex) -> Result<Complex> {
        self.guard(z)?;
        self.omega_unguarded(z)
    }

    fn omega_unguarded(&self, z: Complex) -> Result<Complex> {
        let chi = self.chi(z)?;
        ensure_finite(Complex::new(1.0, 0.0) / chi, "evaluating omega")
    }

    /// `omega_f'(z) = -chi'/chi^2`.
    pub fn omega_derivative(&self, z: Complex) -> Result<Complex> {
        self.guard(z)?;
        let (chi, dchi) = self.chi_jet(z)?;
        ensure_finite(-dchi / (chi * chi), "differentiating omega")
    }

    /// `(1 / 2 pi i)` times the integral of `omega_f` around `|z - p| = radius`.
    pub fn residue_numeric(&self, p: Complex, radius: f64) -> Result<Complex> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("contour radius {radius}")));
        }
        for r in &self.fixed_points {
            let d = (r.location - p).norm();
            if d > 1e-12 && d < 2.0 * radius {
                return Err(Error::ContourConflict { center: p, distance: d });
            }
        }
        let w = |z: Complex| self.omega(z);
        quad::circle_mean(&w, p, radius, RESIDUE_TOL * 1e-2)
    }

    fn segment_guard(&self, a: Complex, b: Complex) -> Result<()> {
        for r in &self.fixed_points {
            let distance = segment_distance(r.location, a, b);
            if distance < self.pole_guard {
                return Err(Error::PathNearPole { pole: r.location, distance });
            }
        }
        Ok(())
    }

    /// Whether `z` coincides with a located fixed point (to root accuracy).
    pub fn is_fixed(&self, z: Complex) -> bool {
        self.fixed_points.iter().any(|r| (r.location - z).norm() <= FIXED_TOL * r.location.norm().max(1.0))
    }

    /// `u_f(z) = -1 + integral of omega_f over [z, f(z)]`.
    pub fn u_f(&self, z: Complex) -> Result<Complex> {
        if self.is_fixed(z) {
            return Ok(Complex::new(0.0, 0.0));
        }
        if let Some(m) = self.models.iter().find(|m| (z - m.center).norm() < m.reach) {
            // inputs must still be admissible for the direct definition
            self.map.displacement_jet(z)?;
            return Ok(m.eval(z));
        }
        self.u_f_direct(z)
    }

    fn u_f_direct(&self, z: Complex) -> Result<Complex> {
        Ok(self.u_f_t_samples(z, &[1.0])?[0])
    }

    /// `u_{f,t}(z) = -t + integral of omega_f over [z, z_t]`, `z_t = z + t (f(z) - z)`.
    pub fn u_f_t(&self, z: Complex, t: f64) -> Result<Complex> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(Complex::new(0.0, 0.0));
        }
        if t == 1.0 {
            return self.u_f(z);
        }
        Ok(self.u_f_t_samples(z, &[t])?[0])
    }

    /// `u_{f,t}(z)` for an increasing list of `t` in `(0, 1]`, sharing the
    /// integration between consecutive samples.
    pub fn u_f_t_samples(&self, z: Complex, ts: &[f64]) -> Result<Vec<Complex>> {
        if self.is_fixed(z) {
            return Ok(vec![Complex::new(0.0, 0.0); ts.len()]);
        }
        let delta = self.map.displacement_jet(z)?.value;
        let fz = z + delta;
        self.map.displacement_jet(fz)?;
        self.segment_guard(z, fz)?;
        // integrand of u_{f,t}: d/dt = Delta * omega(z + t Delta) - 1
        let g = |t: f64| -> Result<Complex> {
            let chi = self.chi(z + delta * t)?;
            Ok(delta / chi - 1.0)
        };
        let mut out = Vec::with_capacity(ts.len());
        let mut acc = Complex::new(0.0, 0.0);
        let mut prev = 0.0;
        for &t in ts {
            if !(t >= prev && t <= 1.0) {
                return Err(Error::InvalidArgument("t samples must increase within [0, 1]".into()));
            }
            acc += quad::adaptive(&g, prev, t, U_TOL)?;
            out.push(acc);
            prev = t;
        }
        Ok(out)
    }

    /// `(1/2 pi i)` times the integral of `omega_f` along the segment `[a, b]`.
    pub fn segment_integral(&self, a: Complex, b: Complex) -> Result<Complex> {
        self.segment_guard(a, b)?;
        let w = |z: Complex| self.omega_unguarded(z);
        quad::segment(&w, a, b, Tolerance::PATH)
    }
}

/// `d/dw [Log(1 + w) / w]` given `l = Log(1 + w) / w`.
fn log1p_over_derivative(w: Complex, l: Complex) -> Complex {
    if w.norm() < 1e-3 {
        // -1/2 + 2w/3 - 3w^2/4 + 4w^3/5
        return Complex::new(-0.5, 0.0) + w * (2.0 / 3.0) - w * w * 0.75 + w * w * w * 0.8;
    }
    Complex::new(1.0, 0.0) / (w * (w + 1.0)) - l / w
}

/// `1 / Log lambda` for simple points, the résidu itératif at multiple ones.
pub fn residue_closed_form(record: &FixedPointRecord) -> Result<Complex> {
    if record.is_parabolic() {
        return Ok(record.resit);
    }
    Ok(Complex::new(1.0, 0.0) / principal_log(record.multiplier)?)
}
