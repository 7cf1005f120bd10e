//! Holomorphic maps: polynomials and explicit iterates of another map.

use serde::Serialize;

use crate::cplx::ensure_finite;
use crate::{quad, Complex, Error, Result};

/// Newton tolerance for [`AnalyticMap::local_inverse`].
pub const NEWTON_TOL: f64 = 1e-12;
/// Iteration cap for [`AnalyticMap::local_inverse`].
pub const NEWTON_MAX_ITER: usize = 64;
/// `|f'|` below which inversion reports a nearby critical point.
pub const CRITICAL_THRESHOLD: f64 = 1e-8;
/// Agreement target for Cauchy-quadrature Taylor coefficients.
pub const TAYLOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// Coefficients in ascending powers of `z`.
    Polynomial { coefficients: Vec<Complex> },
    /// `base` composed with itself `power` times.
    Iterate { base: Box<AnalyticMap>, power: u32 },
}

/// A holomorphic map together with the disk `D(0, validity_radius)` on
/// which it is meant to be evaluated. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticMap {
    kind: MapKind,
    validity_radius: f64,
    /// Expanded coefficients of a polynomial iterate, used for `f(z) - z`.
    #[serde(skip)]
    expanded: Option<Vec<Complex>>,
}

/// Value, first and second derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: Complex,
    pub d1: Complex,
    pub d2: Complex,
}

impl AnalyticMap {
    pub fn polynomial(coefficients: Vec<Complex>, validity_radius: f64) -> Result<Self> {
        check_radius(validity_radius)?;
        if coefficients.is_empty() {
            return Err(Error::InvalidMap("empty coefficient list".into()));
        }
        if coefficients.iter().any(|c| !crate::cplx::is_finite(*c)) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        if *coefficients.last().unwrap() == Complex::new(0.0, 0.0) {
            return Err(Error::InvalidMap("leading coefficient is zero".into()));
        }
        Ok(AnalyticMap { kind: MapKind::Polynomial { coefficients }, validity_radius, expanded: None })
    }

    /// Convenience constructor from real coefficients.
    pub fn real_polynomial(coefficients: &[f64], validity_radius: f64) -> Result<Self> {
        Self::polynomial(coefficients.iter().map(|&c| Complex::new(c, 0.0)).collect(), validity_radius)
    }

    pub fn iterate(base: AnalyticMap, power: u32, validity_radius: f64) -> Result<Self> {
        check_radius(validity_radius)?;
        if power == 0 {
            return Err(Error::InvalidMap("iterate power must be at least 1".into()));
        }
        let expanded = expand_iterate(&base, power);
        Ok(AnalyticMap { kind: MapKind::Iterate { base: Box::new(base), power }, validity_radius, expanded })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    /// Same map, different validity disk.
    pub fn with_radius(&self, validity_radius: f64) -> Result<Self> {
        check_radius(validity_radius)?;
        Ok(AnalyticMap { kind: self.kind.clone(), validity_radius, expanded: self.expanded.clone() })
    }

    pub fn coefficients(&self) -> Option<&[Complex]> {
        match &self.kind {
            MapKind::Polynomial { coefficients } => Some(coefficients),
            MapKind::Iterate { .. } => None,
        }
    }

    /// Algebraic degree (product of degrees for iterates).
    pub fn degree(&self) -> usize {
        match &self.kind {
            MapKind::Polynomial { coefficients } => coefficients.len() - 1,
            MapKind::Iterate { base, power } => base.degree().pow(*power),
        }
    }

    /// Leading coefficient of the expanded polynomial.
    pub fn leading_coefficient(&self) -> Complex {
        match &self.kind {
            MapKind::Polynomial { coefficients } => *coefficients.last().unwrap(),
            MapKind::Iterate { base, power } => {
                // a_d of g^k: a^(1 + d + ... + d^(k-1))
                let a = base.leading_coefficient();
                let d = base.degree() as i32;
                let mut e = 0i32;
                let mut dk = 1i32;
                for _ in 0..*power {
                    e += dk;
                    dk *= d;
                }
                a.powi(e)
            }
        }
    }

    fn check_domain(&self, z: Complex) -> Result<()> {
        if !crate::cplx::is_finite(z) {
            return Err(Error::NonFinite("checking the domain"));
        }
        if z.norm() > self.validity_radius {
            return Err(Error::DomainExceeded { z, radius: self.validity_radius });
        }
        Ok(())
    }

    pub fn evaluate(&self, z: Complex) -> Result<Complex> {
        self.check_domain(z)?;
        let v = match &self.kind {
            MapKind::Polynomial { coefficients } => horner(coefficients, z),
            MapKind::Iterate { base, power } => {
                let mut w = z;
                for _ in 0..*power {
                    w = base.evaluate(w)?;
                }
                w
            }
        };
        ensure_finite(v, "evaluating the map")
    }

    /// Evaluation without the validity-disk check (escape-time iteration).
    pub fn evaluate_unchecked(&self, z: Complex) -> Complex {
        match &self.kind {
            MapKind::Polynomial { coefficients } => horner(coefficients, z),
            MapKind::Iterate { base, power } => {
                let mut w = z;
                for _ in 0..*power {
                    w = base.evaluate_unchecked(w);
                }
                w
            }
        }
    }

    /// Value and derivatives without the domain check.
    pub fn jet_unchecked(&self, z: Complex) -> Jet {
        match &self.kind {
            MapKind::Polynomial { coefficients } => poly_jet(coefficients, z),
            MapKind::Iterate { base, power } => {
                let mut jet = Jet { value: z, d1: Complex::new(1.0, 0.0), d2: Complex::new(0.0, 0.0) };
                for _ in 0..*power {
                    let g = base.jet_unchecked(jet.value);
                    // (g o h)'' = g''(h) h'^2 + g'(h) h''
                    jet = Jet {
                        value: g.value,
                        d1: g.d1 * jet.d1,
                        d2: g.d2 * jet.d1 * jet.d1 + g.d1 * jet.d2,
                    };
                }
                jet
            }
        }
    }

    pub fn jet(&self, z: Complex) -> Result<Jet> {
        self.check_domain(z)?;
        if let MapKind::Iterate { base, power } = &self.kind {
            // intermediate points must stay inside the base map's disk
            let mut w = z;
            for _ in 0..(*power - 1) {
                w = base.evaluate(w)?;
            }
            base.check_domain(w)?;
        }
        let j = self.jet_unchecked(z);
        ensure_finite(j.value, "evaluating the map")?;
        ensure_finite(j.d1, "differentiating the map")?;
        ensure_finite(j.d2, "differentiating the map")?;
        Ok(j)
    }

    pub fn derivative(&self, z: Complex) -> Result<Complex> {
        Ok(self.jet(z)?.d1)
    }

    pub fn second_derivative(&self, z: Complex) -> Result<Complex> {
        Ok(self.jet(z)?.d2)
    }

    /// `f(z) - z` together with its first two derivatives. For polynomials
    /// the identity is subtracted at the coefficient level so that tiny
    /// displacements near fixed points keep full relative accuracy.
    pub fn displacement_jet(&self, z: Complex) -> Result<Jet> {
        match &self.kind {
            MapKind::Polynomial { .. } => self.check_domain(z)?,
            MapKind::Iterate { .. } => {
                self.jet(z)?;
            }
        }
        let j = self.displacement_unchecked(z);
        ensure_finite(j.value, "evaluating the displacement")?;
        Ok(j)
    }

    /// [`AnalyticMap::displacement_jet`] without domain checks.
    pub fn displacement_unchecked(&self, z: Complex) -> Jet {
        let coefficients = match (&self.kind, &self.expanded) {
            (MapKind::Polynomial { coefficients }, _) => coefficients,
            (MapKind::Iterate { .. }, Some(expanded)) => expanded,
            (MapKind::Iterate { .. }, None) => {
                let j = self.jet_unchecked(z);
                return Jet { value: j.value - z, d1: j.d1 - 1.0, d2: j.d2 };
            }
        };
        let mut shifted = coefficients.clone();
        if shifted.len() < 2 {
            shifted.resize(2, Complex::new(0.0, 0.0));
        }
        shifted[1] -= 1.0;
        poly_jet(&shifted, z)
    }

    /// Coefficients of the map as one polynomial, when small enough to expand.
    pub fn expanded_coefficients(&self) -> Option<&[Complex]> {
        match &self.kind {
            MapKind::Polynomial { coefficients } => Some(coefficients),
            MapKind::Iterate { .. } => self.expanded.as_deref(),
        }
    }

    /// `[z, f(z), ..., f^k(z)]`; negative `k` walks backwards through
    /// [`AnalyticMap::local_inverse`] seeded at the current point.
    pub fn iterate_orbit(&self, z: Complex, k: i64) -> Result<Vec<Complex>> {
        let mut out = Vec::with_capacity(k.unsigned_abs() as usize + 1);
        self.check_domain(z)?;
        out.push(z);
        let mut w = z;
        for step in 1..=k.unsigned_abs() as usize {
            let next = if k >= 0 { self.evaluate(w) } else { self.local_inverse(w, w) };
            w = match next {
                Ok(v) if v.norm() <= self.validity_radius => v,
                Ok(_) | Err(Error::DomainExceeded { .. }) => return Err(Error::OrbitEscaped { step }),
                Err(e) => return Err(e),
            };
            out.push(w);
        }
        Ok(out)
    }

    /// Solve `f(z) = w` by Newton's method from `seed`.
    pub fn local_inverse(&self, w: Complex, seed: Complex) -> Result<Complex> {
        let mut z = seed;
        for _ in 0..NEWTON_MAX_ITER {
            let j = self.jet_unchecked(z);
            if !crate::cplx::is_finite(j.value) {
                return Err(Error::NonFinite("inverting the map"));
            }
            if j.d1.norm() < CRITICAL_THRESHOLD {
                return Err(Error::CriticalPointNearby { z, derivative: j.d1.norm() });
            }
            let step = (j.value - w) / j.d1;
            z -= step;
            if step.norm() <= NEWTON_TOL * z.norm().max(1.0) {
                self.check_domain(z)?;
                return Ok(z);
            }
        }
        Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER })
    }

    /// The first `n + 1` Taylor coefficients about `center`.
    pub fn taylor_coefficients(&self, center: Complex, n: usize) -> Result<Vec<Complex>> {
        self.check_domain(center)?;
        match &self.kind {
            MapKind::Polynomial { coefficients } => Ok(taylor_shift(coefficients, center, n)),
            MapKind::Iterate { .. } => {
                let room = self.validity_radius - center.norm();
                let radius = (self.validity_radius / 4.0).min(0.1).min(0.5 * room);
                if radius <= 0.0 {
                    return Err(Error::InvalidArgument("center on the validity boundary".into()));
                }
                let f = |z: Complex| self.evaluate(z);
                quad::cauchy_coefficients(&f, center, radius, n, TAYLOR_TOL)
            }
        }
    }
}

/// Largest degree for which iterates are also kept in expanded form.
const MAX_EXPANDED_DEGREE: usize = 256;

fn expand_iterate(base: &AnalyticMap, power: u32) -> Option<Vec<Complex>> {
    let b = base.expanded_coefficients()?;
    if base.degree().checked_pow(power)? > MAX_EXPANDED_DEGREE {
        return None;
    }
    let mut acc = b.to_vec();
    for _ in 1..power {
        acc = compose(b, &acc);
    }
    Some(acc)
}

/// Coefficients of `outer(inner(z))`.
pub fn compose(outer: &[Complex], inner: &[Complex]) -> Vec<Complex> {
    let mut acc = vec![Complex::new(0.0, 0.0)];
    for c in outer.iter().rev() {
        acc = poly_mul(&acc, inner);
        acc[0] += c;
    }
    while acc.len() > 1 && *acc.last().unwrap() == Complex::new(0.0, 0.0) {
        acc.pop();
    }
    acc
}

fn poly_mul(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidMap(format!("validity radius must be positive, got {r}")))
    }
}

fn horner(coefficients: &[Complex], z: Complex) -> Complex {
    coefficients.iter().rev().fold(Complex::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn poly_jet(coefficients: &[Complex], z: Complex) -> Jet {
    let zero = Complex::new(0.0, 0.0);
    let (mut p, mut d1, mut d2) = (zero, zero, zero);
    for c in coefficients.iter().rev() {
        d2 = d2 * z + d1 * 2.0;
        d1 = d1 * z + p;
        p = p * z + c;
    }
    Jet { value: p, d1, d2 }
}

/// Coefficients of `p(center + h)` in powers of `h`, truncated/padded to `n + 1`.
fn taylor_shift(coefficients: &[Complex], center: Complex, n: usize) -> Vec<Complex> {
    let mut work = coefficients.to_vec();
    let deg = work.len();
    // repeated synthetic division
    for k in 0..deg {
        for j in (k..deg - 1).rev() {
            let carry = work[j + 1] * center;
            work[j] += carry;
        }
    }
    work.resize(n + 1, Complex::new(0.0, 0.0));
    work
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::c;

    fn quad_map() -> AnalyticMap {
        AnalyticMap::real_polynomial(&[0.0, 1.0, 1.0], 1.0).unwrap()
    }

    fn cubic_g() -> AnalyticMap {
        AnalyticMap::real_polynomial(&[0.0, -1.0, 0.0, 1.0], 0.5).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(quad_map().evaluate(c(0.5, 0.0)).unwrap(), c(0.75, 0.0));
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 2.0).unwrap();
        assert_eq!(lin.evaluate(c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn evaluate_rejects_points_outside_disk() {
        let e = quad_map().evaluate(c(1.5, 0.0)).unwrap_err();
        assert!(matches!(e, Error::DomainExceeded { .. }));
        assert!(matches!(quad_map().evaluate(c(f64::NAN, 0.0)), Err(Error::NonFinite(_))));
    }

    #[test]
    fn constructor_validation() {
        assert!(AnalyticMap::real_polynomial(&[1.0, 0.0], 1.0).is_err());
        assert!(AnalyticMap::real_polynomial(&[], 1.0).is_err());
        assert!(AnalyticMap::real_polynomial(&[1.0], -1.0).is_err());
        assert!(AnalyticMap::iterate(quad_map(), 0, 1.0).is_err());
    }

    #[test]
    fn iterate_is_repeated_base_evaluation() {
        let g = cubic_g();
        let f = AnalyticMap::iterate(g.clone(), 2, 0.5).unwrap();
        let z = c(0.1, 0.0);
        assert_eq!(f.evaluate(z).unwrap(), g.evaluate(g.evaluate(z).unwrap()).unwrap());
        // g(g(z)) = z - 2z^3 + 3z^5 - 3z^7 + z^9
        let x: f64 = 0.1;
        let expanded = x - 2.0 * x.powi(3) + 3.0 * x.powi(5) - 3.0 * x.powi(7) + x.powi(9);
        assert!((f.evaluate(z).unwrap().re - expanded).abs() < 1e-16);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(quad_map().derivative(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 2.0).unwrap();
        assert_eq!(lin.derivative(c(0.3, 0.7)).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn cycle_multiplier_is_product_of_derivatives() {
        // g(z) = -a z + z^3 has the 2-cycle {+-sqrt(a-1)}
        let a = (1.0_f64 / 50.0).exp();
        let g = AnalyticMap::polynomial(vec![c(0.0, 0.0), c(-a, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 0.5).unwrap();
        let f = AnalyticMap::iterate(g.clone(), 2, 0.5).unwrap();
        let p = c((a - 1.0).sqrt(), 0.0);
        let gp = g.evaluate(p).unwrap();
        assert!((gp + p).norm() < 1e-15);
        let mu = g.derivative(gp).unwrap() * g.derivative(p).unwrap();
        assert!((f.derivative(p).unwrap() - mu).norm() < 1e-14);
        assert!((f.derivative(-p).unwrap() - mu).norm() < 1e-14);
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(quad_map().iterate_orbit(c(0.0, 0.0), 5).unwrap(), vec![c(0.0, 0.0); 6]);
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 1.0).unwrap();
        let o = lin.iterate_orbit(c(0.01, 0.0), 3).unwrap();
        assert_eq!(o, vec![c(0.01, 0.0), c(0.02, 0.0), c(0.04, 0.0), c(0.08, 0.0)]);
        let o = quad_map().iterate_orbit(c(-0.5, 0.0), 2).unwrap();
        assert_eq!(o, vec![c(-0.5, 0.0), c(-0.25, 0.0), c(-0.1875, 0.0)]);
        assert!(matches!(lin.iterate_orbit(c(0.3, 0.0), 3), Err(Error::OrbitEscaped { step: 2 })));
    }

    #[test]
    fn backward_orbit_inverts_forward_orbit() {
        let f = quad_map();
        let fwd = f.iterate_orbit(c(0.1, 0.05), 3).unwrap();
        let back = f.iterate_orbit(fwd[3], -3).unwrap();
        for (a, b) in fwd.iter().rev().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn local_inverse_examples() {
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 1.0).unwrap();
        assert!((lin.local_inverse(c(1.0, 0.0), c(0.4, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-14);
        assert!(quad_map().local_inverse(c(0.0, 0.0), c(0.1, 0.0)).unwrap().norm() < 1e-14);
        assert!((quad_map().local_inverse(c(0.75, 0.0), c(0.4, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn local_inverse_reports_critical_point() {
        // f'(-1/2) = 0
        let f = AnalyticMap::real_polynomial(&[0.0, 1.0, 1.0], 2.0).unwrap();
        let e = f.local_inverse(c(-0.25, 0.0), c(-0.5, 0.0)).unwrap_err();
        assert!(matches!(e, Error::CriticalPointNearby { .. }));
    }

    #[test]
    fn taylor_examples() {
        let t = quad_map().taylor_coefficients(c(0.0, 0.0), 3).unwrap();
        assert_eq!(t, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 2.0).unwrap();
        assert_eq!(lin.taylor_coefficients(c(1.0, 0.0), 1).unwrap(), vec![c(2.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn taylor_shift_matches_direct_expansion() {
        // (z)^3 about 2: 8 + 12h + 6h^2 + h^3
        let p = AnalyticMap::real_polynomial(&[0.0, 0.0, 0.0, 1.0], 3.0).unwrap();
        let t = p.taylor_coefficients(c(2.0, 0.0), 4).unwrap();
        let want = [8.0, 12.0, 6.0, 1.0, 0.0];
        for (a, b) in t.iter().zip(want) {
            assert!((a - c(b, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn displacement_is_accurate_near_fixed_point() {
        let f = AnalyticMap::real_polynomial(&[0.0, 1.0, 0.0, 0.0, 1.0], 0.5).unwrap();
        let z = c(1e-4, 0.0);
        let j = f.displacement_jet(z).unwrap();
        assert!((j.value.re - 1e-16).abs() < 1e-30);
        assert!((j.d1.re - 4e-12).abs() < 1e-26);
    }

    #[test]
    fn leading_coefficient_of_iterate() {
        let g = AnalyticMap::real_polynomial(&[0.0, 0.0, 2.0], 1.0).unwrap();
        let f = AnalyticMap::iterate(g, 2, 1.0).unwrap();
        // 2(2z^2)^2 = 8 z^4
        assert_eq!(f.leading_coefficient(), c(8.0, 0.0));
        assert_eq!(f.degree(), 4);
    }
}
