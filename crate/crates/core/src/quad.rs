//! Quadrature: Gauss-Legendre on segments with bisection, trapezoid on circles
//! with node doubling.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use crate::{Complex, Error, Result};

/// Hard cap on the number of sub-intervals an adaptive integral may use.
pub const MAX_PIECES: usize = 1 << 14;
/// Largest node count the circle trapezoid rule doubles up to.
pub const MAX_CIRCLE_NODES: usize = 1 << 16;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`, symmetric pairs filled together.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The 16-point rule used by every segment integral.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// `int_a^b f(t) dt` with one application of the rule.
    pub fn apply<F>(&self, f: &F, a: f64, b: f64) -> Result<Complex>
    where
        F: Fn(f64) -> Result<Complex>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x)? * *w;
        }
        Ok(acc * half)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Acceptance rule for adaptive quadrature: a piece passes when its two
/// estimates differ by at most `max(abs * len / total_len, rel * |estimate|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const PATH: Tolerance = Tolerance { rel: 1e-10, abs: 1e-12 };
}

/// `int_a^b f(t) dt` by bisection with the 16-point rule.
pub fn adaptive<F>(f: &F, a: f64, b: f64, tol: Tolerance) -> Result<Complex>
where
    F: Fn(f64) -> Result<Complex>,
{
    if a == b {
        return Ok(Complex::new(0.0, 0.0));
    }
    let rule = GaussLegendre::sixteen();
    let total = (b - a).abs();
    let mut stack = vec![(a, b, rule.apply(f, a, b)?)];
    let mut acc = Complex::new(0.0, 0.0);
    let mut pieces = 1usize;
    while let Some((l, r, whole)) = stack.pop() {
        let m = 0.5 * (l + r);
        let left = rule.apply(f, l, m)?;
        let right = rule.apply(f, m, r)?;
        let halves = left + right;
        let allowed = (tol.abs * (r - l).abs() / total).max(tol.rel * halves.norm());
        if (whole - halves).norm() <= allowed || (r - l).abs() < total * 1e-15 {
            acc += halves;
            continue;
        }
        pieces += 1;
        if pieces > MAX_PIECES {
            return Err(Error::QuadratureFailure { tolerance: tol.rel });
        }
        stack.push((m, r, right));
        stack.push((l, m, left));
    }
    Ok(acc)
}

/// Line integral of `f` along the segment `[a, b]`.
pub fn segment<F>(f: &F, a: Complex, b: Complex, tol: Tolerance) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let d = b - a;
    if d.norm() == 0.0 {
        return Ok(Complex::new(0.0, 0.0));
    }
    let g = |t: f64| f(a + d * t);
    Ok(adaptive(&g, 0.0, 1.0, tol)? * d)
}

/// Samples of `f` on `n` equispaced points of the circle `|z - center| = radius`.
fn circle_samples<F>(f: &F, center: Complex, radius: f64, n: usize, offset: usize, stride: usize) -> Result<Vec<(Complex, Complex)>>
where
    F: Fn(Complex) -> Result<Complex>,
{
    (offset..n)
        .step_by(stride)
        .map(|k| {
            let th = TAU * k as f64 / n as f64;
            let z = center + Complex::from_polar(radius, th);
            Ok((z, f(z)?))
        })
        .collect()
}

/// `(1/2 pi i) * contour integral of f` over the positively oriented circle,
/// trapezoid rule doubling nodes until two estimates agree to `tol`
/// (relative to `max(1, |estimate|)`).
pub fn circle_mean<F>(f: &F, center: Complex, radius: f64, tol: f64) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let mut n = 16usize;
    let mut sum: Complex = circle_samples(f, center, radius, n, 0, 1)?
        .into_iter()
        .map(|(z, v)| v * (z - center))
        .sum();
    let mut prev = sum / n as f64;
    while n < MAX_CIRCLE_NODES {
        let fresh: Complex = circle_samples(f, center, radius, 2 * n, 1, 2)?
            .into_iter()
            .map(|(z, v)| v * (z - center))
            .sum();
        sum += fresh;
        n *= 2;
        let est = sum / n as f64;
        if (est - prev).norm() <= tol * est.norm().max(1.0) {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::QuadratureFailure { tolerance: tol })
}

/// Taylor coefficients `c_0..=c_n` of `f` about `center` from the Cauchy
/// integral on a circle of the given radius. Node count doubles until two
/// successive coefficient sets agree to `tol` in the scaled sense
/// `|c_k| radius^k`.
pub fn cauchy_coefficients<F>(f: &F, center: Complex, radius: f64, n: usize, tol: f64) -> Result<Vec<Complex>>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let coeffs_from = |samples: &[(Complex, Complex)]| -> Vec<Complex> {
        let m = samples.len() as f64;
        (0..=n)
            .map(|k| {
                samples
                    .iter()
                    .map(|(z, v)| *v * (*z - center).powi(-(k as i32)))
                    .sum::<Complex>()
                    / m
            })
            .collect()
    };
    let mut nodes = (2 * (n + 1)).next_power_of_two().max(32);
    let mut samples = circle_samples(f, center, radius, nodes, 0, 1)?;
    let mut prev = coeffs_from(&samples);
    while nodes < MAX_CIRCLE_NODES {
        let fresh = circle_samples(f, center, radius, 2 * nodes, 1, 2)?;
        samples.extend(fresh);
        nodes *= 2;
        let cur = coeffs_from(&samples);
        let scale = samples.iter().map(|(_, v)| v.norm()).fold(1.0_f64, f64::max);
        let diff = cur
            .iter()
            .zip(&prev)
            .enumerate()
            .map(|(k, (a, b))| (a - b).norm() * radius.powi(k as i32))
            .fold(0.0_f64, f64::max);
        if diff <= tol * scale {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureFailure { tolerance: tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        let rule = GaussLegendre::sixteen();
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // exact for x^30 on [-1,1]: 2/31
        let i: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(30))
            .sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
        for w in rule.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // int_0^1 1/(x^2 + 1e-4) dx = 100 atan(100)
        let f = |x: f64| Ok(Complex::new(1.0 / (x * x + 1e-4), 0.0));
        let v = adaptive(&f, 0.0, 1.0, Tolerance::PATH).unwrap();
        assert!((v.re - 100.0 * 100f64.atan()).abs() < 1e-8);
    }

    #[test]
    fn circle_mean_gives_residue() {
        let f = |z: Complex| Ok(Complex::new(3.0, 1.0) / (z - Complex::new(0.1, 0.0)) + z * z);
        let r = circle_mean(&f, Complex::new(0.0, 0.0), 0.5, 1e-12).unwrap();
        assert!((r - Complex::new(3.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn cauchy_coefficients_of_polynomial() {
        let f = |z: Complex| Ok(Complex::new(1.0, 0.0) + z * 2.0 + z * z * z * 5.0);
        let cs = cauchy_coefficients(&f, Complex::new(0.0, 0.0), 0.1, 4, 1e-12).unwrap();
        let want = [1.0, 2.0, 0.0, 5.0, 0.0];
        for (c, w) in cs.iter().zip(want) {
            assert!((c - Complex::new(w, 0.0)).norm() < 1e-10, "{c} vs {w}");
        }
    }
}
