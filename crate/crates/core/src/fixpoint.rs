//! Fixed points, multipliers, holomorphic indices and the bifurcated cycle.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::cplx::{arg_positive, principal_log};
use crate::germ::{AnalyticMap, MapKind};
use crate::{quad, Complex, Error, Result};

/// Seeds per axis of the Newton grid.
pub const SEED_GRID: usize = 40;
/// Newton candidates closer than this are the same root.
pub const DEDUP_DIST: f64 = 1e-8;
/// `|f'(p) - 1|` below which a fixed point is treated as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-8;
/// Contour radius for winding numbers and numeric indices.
pub const WINDING_RADIUS: f64 = 1e-3;
/// Candidates whose Newton iterates scatter around a multiple root stay
/// within this distance of each other.
const CLUSTER_DIST: f64 = 1e-4;
const CONTOUR_TOL: f64 = 1e-12;
const BOUNDARY_TOL: f64 = 1e-9;
const NEWTON_ITERS: usize = 200;

/// One fixed point with its local invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub location: Complex,
    pub multiplier: Complex,
    pub multiplicity: u32,
    pub index: Complex,
    pub resit: Complex,
    pub big_lambda: Option<Complex>,
}

impl FixedPointRecord {
    pub fn is_parabolic(&self) -> bool {
        self.multiplicity >= 2
    }

    /// Record of a simple fixed point from its multiplier alone.
    pub fn simple(location: Complex, multiplier: Complex) -> Self {
        let one = Complex::new(1.0, 0.0);
        let index = one / (one - multiplier);
        let big_lambda = multiplier_param(multiplier, 1).ok();
        FixedPointRecord {
            location,
            multiplier,
            multiplicity: 1,
            index,
            resit: Complex::new(0.5, 0.0) - index,
            big_lambda,
        }
    }
}

/// All fixed points of `map` in the closed disk `|z| <= radius`.
pub fn find_fixed_points(map: &AnalyticMap, radius: f64) -> Result<Vec<FixedPointRecord>> {
    if !(radius > 0.0) || radius > map.validity_radius() {
        return Err(Error::InvalidArgument(format!(
            "search radius {radius} must lie in (0, {}]",
            map.validity_radius()
        )));
    }
    let candidates = newton_candidates(map, radius);
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let mut roots = Vec::new();
    for cluster in cluster_candidates(&candidates) {
        roots.extend(resolve_cluster(map, &cluster)?);
    }
    let mut records = Vec::new();
    for &(root, m) in &roots {
        if (root.norm() - radius).abs() <= BOUNDARY_TOL * radius.max(1.0) {
            return Err(Error::BoundaryRoot { root, radius });
        }
        if root.norm() > radius {
            continue;
        }
        let spacing = roots
            .iter()
            .map(|(w, _)| (w - root).norm())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let rho = (0.4 * spacing).min(max_contour_radius(map, root));
        records.push(build_record(map, root, m, rho)?);
    }
    records.sort_by(|a, b| {
        a.location
            .norm()
            .total_cmp(&b.location.norm())
            .then(arg_positive(a.location).total_cmp(&arg_positive(b.location)))
    });
    Ok(records)
}

fn newton_candidates(map: &AnalyticMap, radius: f64) -> Vec<(Complex, f64)> {
    let mut out: Vec<(Complex, f64)> = Vec::new();
    let n = SEED_GRID;
    for i in 0..n {
        for j in 0..n {
            let x = -radius + 2.0 * radius * (i as f64 + 0.5) / n as f64;
            let y = -radius + 2.0 * radius * (j as f64 + 0.5) / n as f64;
            let seed = Complex::new(x, y);
            if seed.norm() > radius {
                continue;
            }
            if let Some(z) = newton_root(map, seed, 2.0 * radius) {
                let res = map.displacement_unchecked(z).value.norm();
                if z.norm() <= radius * (1.0 + 1e-6) + BOUNDARY_TOL
                    && !out.iter().any(|(w, _)| (w - z).norm() < DEDUP_DIST)
                {
                    out.push((z, res));
                }
            }
        }
    }
    out
}

fn newton_root(map: &AnalyticMap, seed: Complex, bailout: f64) -> Option<Complex> {
    let mut z = seed;
    for _ in 0..NEWTON_ITERS {
        let j = map.displacement_unchecked(z);
        if j.value == Complex::new(0.0, 0.0) {
            return Some(z);
        }
        if j.d1 == Complex::new(0.0, 0.0) || !crate::cplx::is_finite(j.d1) {
            return None;
        }
        let step = j.value / j.d1;
        z -= step;
        if !crate::cplx::is_finite(z) || z.norm() > bailout {
            return None;
        }
        if step.norm() <= 1e-15 * z.norm().max(1e-3) {
            break;
        }
    }
    let residual = map.displacement_unchecked(z).value.norm();
    (residual < 1e-10).then_some(z)
}

/// Single-linkage grouping of candidates closer than [`CLUSTER_DIST`].
fn cluster_candidates(candidates: &[(Complex, f64)]) -> Vec<Vec<(Complex, f64)>> {
    let mut clusters: Vec<Vec<(Complex, f64)>> = Vec::new();
    for &cand in candidates {
        let hits: Vec<usize> = clusters
            .iter()
            .enumerate()
            .filter(|(_, cl)| cl.iter().any(|(w, _)| (w - cand.0).norm() < CLUSTER_DIST))
            .map(|(i, _)| i)
            .collect();
        match hits.split_first() {
            None => clusters.push(vec![cand]),
            Some((&first, rest)) => {
                for &i in rest.iter().rev() {
                    let moved = clusters.remove(i);
                    clusters[first].extend(moved);
                }
                clusters[first].push(cand);
            }
        }
    }
    clusters
}

/// Split a cluster into roots with multiplicities using the winding number
/// and power sums of the enclosed roots.
fn resolve_cluster(map: &AnalyticMap, cluster: &[(Complex, f64)]) -> Result<Vec<(Complex, u32)>> {
    let best = cluster.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    if cluster.len() == 1 {
        let m = winding_number(map, best, WINDING_RADIUS.min(0.5 * map.validity_radius()))?;
        if m <= 1 {
            return Ok(vec![(polish(map, best), 1)]);
        }
        // a multiple root whose Newton iterates all collapsed to one point
        let c = root_centroid(map, best, WINDING_RADIUS, m)?;
        return Ok(vec![(c, m as u32)]);
    }
    let mean = cluster.iter().map(|(z, _)| *z).sum::<Complex>() / cluster.len() as f64;
    let m = winding_number(map, mean, WINDING_RADIUS)?;
    if m < 1 {
        return Err(Error::RootFinderFailure(format!("no root enclosed near {mean}")));
    }
    let c = root_centroid(map, mean, WINDING_RADIUS, m)?;
    if map.displacement_unchecked(c).d1.norm() < PARABOLIC_TOL || m == 1 {
        return Ok(vec![(c, m as u32)]);
    }
    // genuinely distinct nearby roots: each must be simple
    let mut out = Vec::new();
    for (z, _) in cluster {
        let p = polish(map, *z);
        if !out.iter().any(|(w, _): &(Complex, u32)| (w - p).norm() < DEDUP_DIST) {
            out.push((p, 1));
        }
    }
    if out.len() as i64 != m {
        return Err(Error::RootFinderFailure(format!(
            "winding number {m} near {mean} disagrees with {} located roots",
            out.len()
        )));
    }
    Ok(out)
}

fn polish(map: &AnalyticMap, z: Complex) -> Complex {
    let mut z = z;
    for _ in 0..3 {
        let j = map.displacement_unchecked(z);
        if j.d1.norm() == 0.0 {
            break;
        }
        z -= j.value / j.d1;
    }
    z
}

/// Winding number of `z - f(z)` around the circle `|z - center| = radius`.
pub fn winding_number(map: &AnalyticMap, center: Complex, radius: f64) -> Result<i64> {
    let g = |z: Complex| {
        let j = map.displacement_unchecked(z);
        Ok(j.d1 / j.value)
    };
    let w = quad::circle_mean(&g, center, radius, 1e-9)?;
    if (w.re - w.re.round()).abs() > 1e-3 || w.im.abs() > 1e-3 {
        return Err(Error::RootFinderFailure(format!("non-integral winding number {w} about {center}")));
    }
    Ok(w.re.round() as i64)
}

/// Mean of the `m` roots enclosed by the circle.
fn root_centroid(map: &AnalyticMap, center: Complex, radius: f64, m: i64) -> Result<Complex> {
    let g = |z: Complex| {
        let j = map.displacement_unchecked(z);
        Ok((z - center) * j.d1 / j.value)
    };
    Ok(center + quad::circle_mean(&g, center, radius, CONTOUR_TOL)? / m as f64)
}

fn build_record(map: &AnalyticMap, location: Complex, multiplicity: u32, rho: f64) -> Result<FixedPointRecord> {
    if multiplicity == 1 {
        let lambda = map.jet_unchecked(location).d1;
        if (lambda - 1.0).norm() >= PARABOLIC_TOL {
            return Ok(FixedPointRecord::simple(location, lambda));
        }
    }
    let index = contour_index(map, location, rho)?;
    Ok(FixedPointRecord {
        location,
        multiplier: Complex::new(1.0, 0.0),
        multiplicity,
        index,
        resit: Complex::new(multiplicity as f64 / 2.0, 0.0) - index,
        big_lambda: None,
    })
}

fn contour_index(map: &AnalyticMap, p: Complex, radius: f64) -> Result<Complex> {
    let g = |z: Complex| Ok(-1.0 / map.displacement_unchecked(z).value);
    quad::circle_mean(&g, p, radius, CONTOUR_TOL)
}

/// Largest contour radius tried around `p`.
fn max_contour_radius(map: &AnalyticMap, p: Complex) -> f64 {
    (0.25 * (map.validity_radius() - p.norm())).min(0.1)
}

/// Largest radius on the ladder `0.1 / 4^k` (down to the winding radius)
/// whose circle and its double enclose the same roots as the smallest one.
/// Large circles keep the integrand `1/(z - f(z))` well conditioned.
pub fn contour_radius(map: &AnalyticMap, p: Complex) -> Result<f64> {
    let base = winding_number(map, p, WINDING_RADIUS)?;
    let mut rho = max_contour_radius(map, p) / 2.0;
    while rho > WINDING_RADIUS {
        if winding_number(map, p, rho)? == base && winding_number(map, p, 2.0 * rho)? == base {
            return Ok(rho);
        }
        rho /= 4.0;
    }
    if winding_number(map, p, 2.0 * WINDING_RADIUS)? != base {
        return Err(Error::ContourConflict { center: p, distance: 2.0 * WINDING_RADIUS });
    }
    Ok(WINDING_RADIUS)
}

/// `res(dz / (z - f(z)), p)`. Closed form `1/(1 - lambda)` off the parabolic
/// case, contour integral otherwise.
pub fn holomorphic_index(map: &AnalyticMap, p: Complex) -> Result<Complex> {
    let lambda = map.derivative(p)?;
    if (lambda - 1.0).norm() >= PARABOLIC_TOL {
        return Ok(Complex::new(1.0, 0.0) / (Complex::new(1.0, 0.0) - lambda));
    }
    contour_index(map, p, contour_radius(map, p)?)
}

/// Fixed-point multiplicity at `p` from the winding number.
pub fn multiplicity(map: &AnalyticMap, p: Complex) -> Result<u32> {
    let lambda = map.derivative(p)?;
    if (lambda - 1.0).norm() >= PARABOLIC_TOL {
        return Ok(1);
    }
    contour_radius(map, p)?;
    let m = winding_number(map, p, WINDING_RADIUS)?;
    u32::try_from(m).map_err(|_| Error::RootFinderFailure(format!("negative winding at {p}")))
}

/// Résidu itératif `m/2 - index`.
pub fn resit(map: &AnalyticMap, p: Complex) -> Result<Complex> {
    let m = multiplicity(map, p)?;
    Ok(Complex::new(m as f64 / 2.0, 0.0) - holomorphic_index(map, p)?)
}

/// `1 / Log(lambda^q)` on the principal branch.
pub fn multiplier_param(lambda: Complex, q: u32) -> Result<Complex> {
    let lq = lambda.powu(q);
    if lq == Complex::new(1.0, 0.0) {
        return Err(Error::UnitMultiplier);
    }
    let l = principal_log(lq)?;
    if l == Complex::new(0.0, 0.0) {
        return Err(Error::UnitMultiplier);
    }
    Ok(Complex::new(1.0, 0.0) / l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    NonTangential,
    Tangential,
    Undetermined,
}

/// Minimum sequence length accepted by [`classify_approach`].
pub const MIN_APPROACH_SAMPLES: usize = 8;
pub const DEFAULT_APPROACH_BOUND: f64 = 10.0;

/// Tail test on `|Im Lambda / Re Lambda|` over the last half of the list.
pub fn classify_approach(lambdas: &[Complex], q: u32, bound: f64) -> Result<Approach> {
    if lambdas.len() < MIN_APPROACH_SAMPLES {
        return Err(Error::InsufficientData { needed: MIN_APPROACH_SAMPLES, got: lambdas.len() });
    }
    let ratios = lambdas
        .iter()
        .map(|l| {
            let big = multiplier_param(*l, q)?;
            Ok((big.im / big.re).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail = &ratios[ratios.len() / 2..];
    let max = tail.iter().copied().fold(0.0_f64, f64::max);
    if max <= bound {
        return Ok(Approach::NonTangential);
    }
    let increasing = tail.windows(2).all(|w| w[1] >= w[0]);
    Ok(if increasing { Approach::Tangential } else { Approach::Undetermined })
}

/// The fixed point at 0 of `f_n` and the `q`-cycle that split off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationData {
    pub origin_record: FixedPointRecord,
    pub cycle: Vec<FixedPointRecord>,
    pub delta: Complex,
    pub rho: Complex,
    /// Coefficient of `z^(q+1)` in the limit map; `a p^q / delta -> 1`.
    pub leading: Complex,
    pub q: u32,
}

impl BifurcationData {
    /// The shared cycle multiplier `mu`.
    pub fn cycle_multiplier(&self) -> Complex {
        self.cycle[0].multiplier
    }

    /// `p^q / delta` for each cycle point.
    pub fn est2_ratios(&self) -> Vec<Complex> {
        self.cycle.iter().map(|r| r.location.powu(self.q) / self.delta).collect()
    }

    /// `a p^q / delta`: the same ratio after scaling the limit map to the
    /// form `z + z^(q+1) + ...`.
    pub fn normalized_est2_ratios(&self) -> Vec<Complex> {
        self.est2_ratios().into_iter().map(|r| r * self.leading).collect()
    }
}

pub fn bifurcation_data(limit_map: &AnalyticMap, perturbed_map: &AnalyticMap, q: u32, radius: f64) -> Result<BifurcationData> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let records = find_fixed_points(perturbed_map, radius)?;
    let found: u32 = records.iter().map(|r| r.multiplicity).sum();
    if found != q + 1 || records.len() != q as usize + 1 {
        return Err(Error::WrongFixedPointCount { expected: q as usize + 1, found: found as usize });
    }
    if let Some(r) = records.iter().find(|r| (r.multiplier - 1.0).norm() < 1e-10) {
        return Err(Error::Degenerate { location: r.location });
    }
    let origin_pos = records
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.location.norm().total_cmp(&b.1.location.norm()))
        .map(|(i, _)| i)
        .unwrap();
    let mut cycle = records;
    let origin_record = cycle.remove(origin_pos);
    // arguments in (0, 2pi] so that j = q is the point on the positive axis
    let key = |z: Complex| {
        let a = arg_positive(z);
        if a <= 1e-12 { TAU } else { a }
    };
    cycle.sort_by(|a, b| key(a.location).total_cmp(&key(b.location)));

    let mu = cycle[0].multiplier;
    if let Some(r) = cycle.iter().find(|r| (r.multiplier - mu).norm() > 1e-8 * mu.norm().max(1.0)) {
        return Err(Error::RootFinderFailure(format!(
            "cycle multipliers disagree: {} vs {}",
            r.multiplier, mu
        )));
    }
    if let MapKind::Iterate { base, .. } = perturbed_map.kind() {
        for r in &cycle {
            let image = base.evaluate_unchecked(r.location);
            if !cycle.iter().any(|s| (s.location - image).norm() < 1e-9) {
                return Err(Error::RootFinderFailure(format!(
                    "cycle point {} not permuted by the base map",
                    r.location
                )));
            }
        }
    }

    let delta = Complex::new(1.0, 0.0) - origin_record.multiplier;
    let rho = resit(limit_map, Complex::new(0.0, 0.0))?;
    let leading = limit_map.taylor_coefficients(Complex::new(0.0, 0.0), q as usize + 1)?[q as usize + 1];
    Ok(BifurcationData { origin_record, cycle, delta, rho, leading, q })
}

/// Repelling sectors about `2j pi/q` or attracting sectors about `(2j-1) pi/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorCase {
    RepellingA,
    AttractingB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub q: u32,
    pub theta0: f64,
    pub case: SectorCase,
}

impl SectorSpec {
    pub fn new(q: u32, theta0: f64, case: SectorCase) -> Result<Self> {
        if q == 0 || !(theta0 > 0.0 && theta0 < PI / 2.0) {
            return Err(Error::InvalidArgument(format!("bad sector spec q={q}, theta0={theta0}")));
        }
        Ok(SectorSpec { q, theta0, case })
    }

    pub fn half_width(&self) -> f64 {
        (PI / 2.0 - self.theta0 / 2.0) / self.q as f64
    }

    pub fn center(&self, j: u32) -> f64 {
        let q = self.q as f64;
        match self.case {
            SectorCase::RepellingA => 2.0 * j as f64 * PI / q,
            SectorCase::AttractingB => (2.0 * j as f64 - 1.0) * PI / q,
        }
    }
}

/// Index `j` in `1..=q` of the sector containing `p`, if any.
pub fn sector_label(p: Complex, spec: &SectorSpec) -> Option<u32> {
    let r = p.norm();
    if !(r > 0.0 && r < 1.0) {
        return None;
    }
    let theta = p.arg();
    (1..=spec.q).find(|&j| crate::cplx::angle_distance(theta, spec.center(j)) < spec.half_width())
}

/// `|Lambda + q M - rho|`.
pub fn sum_rule_check(data: &BifurcationData) -> Result<f64> {
    let big_lambda = multiplier_param(data.origin_record.multiplier, 1)?;
    let big_m = multiplier_param(data.cycle_multiplier(), 1)?;
    Ok((big_lambda + big_m * data.q as f64 - data.rho).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::c;

    fn quad(lambda: f64) -> AnalyticMap {
        AnalyticMap::real_polynomial(&[0.0, lambda, 1.0], 0.5).unwrap()
    }

    fn g_iterate(a: f64) -> AnalyticMap {
        let g = AnalyticMap::real_polynomial(&[0.0, -a, 0.0, 1.0], 0.5).unwrap();
        AnalyticMap::iterate(g, 2, 0.5).unwrap()
    }

    /// Residue of `1/(z - f(z))` at `p` by a contour integral, independent of
    /// the record machinery.
    fn index_oracle(map: &AnalyticMap, p: Complex, r: f64) -> Complex {
        let n = 4096;
        (0..n)
            .map(|k| {
                let z = p + Complex::from_polar(r, TAU * k as f64 / n as f64);
                (z - p) / (z - map.evaluate_unchecked(z))
            })
            .sum::<Complex>()
            / n as f64
    }

    #[test]
    fn simple_roots_of_quadratic() {
        let fps = find_fixed_points(&quad(1.1), 0.5).unwrap();
        assert_eq!(fps.len(), 2);
        assert!(fps[0].location.norm() < 1e-14);
        assert!((fps[0].multiplier - c(1.1, 0.0)).norm() < 1e-14);
        assert!((fps[1].location - c(-0.1, 0.0)).norm() < 1e-14);
        assert!((fps[1].multiplier - c(0.9, 0.0)).norm() < 1e-13);
        assert!(fps.iter().all(|r| r.multiplicity == 1));
    }

    #[test]
    fn double_root() {
        let fps = find_fixed_points(&quad(1.0), 0.5).unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].multiplicity, 2);
        assert!(fps[0].location.norm() < 1e-10);
        assert!(fps[0].index.norm() < 1e-9);
        assert!((fps[0].resit - c(1.0, 0.0)).norm() < 1e-9);
        assert!(fps[0].big_lambda.is_none());
    }

    #[test]
    fn triple_root_of_iterate() {
        let f = g_iterate(1.0);
        let fps = find_fixed_points(&f, 0.5).unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].multiplicity, 3);
        assert!(fps[0].location.norm() < 1e-9);
        // f = z - 2z^3 + 3z^5 + ...: index = b/a^2 with a = -2, b = 3
        let oracle = index_oracle(&f, c(0.0, 0.0), 0.05);
        assert!((fps[0].index - oracle).norm() < 1e-9);
        assert!((fps[0].index - c(0.75, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn index_examples() {
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 1.0).unwrap();
        assert_eq!(holomorphic_index(&lin, c(0.0, 0.0)).unwrap(), c(-1.0, 0.0));
        let f = quad(1.0);
        let oracle = index_oracle(&f, c(0.0, 0.0), 0.1);
        assert!(oracle.norm() < 1e-12);
        assert!(holomorphic_index(&f, c(0.0, 0.0)).unwrap().norm() < 1e-9);
        let f3 = AnalyticMap::real_polynomial(&[0.0, 1.0, 1.0, 1.0], 0.5).unwrap();
        assert!((holomorphic_index(&f3, c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn resit_examples() {
        let lin = AnalyticMap::real_polynomial(&[0.0, 2.0], 1.0).unwrap();
        assert!((resit(&lin, c(0.0, 0.0)).unwrap() - c(1.5, 0.0)).norm() < 1e-15);
        assert!((resit(&quad(1.0), c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
        let f3 = AnalyticMap::real_polynomial(&[0.0, 1.0, 1.0, 1.0], 0.5).unwrap();
        assert!(resit(&f3, c(0.0, 0.0)).unwrap().norm() < 1e-9);
    }

    #[test]
    fn index_detects_contour_conflict() {
        let g = AnalyticMap::polynomial(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 0.5).unwrap();
        // z + z^3 has a triple root at 0, no conflict
        assert!(holomorphic_index(&g, c(0.0, 0.0)).is_ok());
        let h = AnalyticMap::real_polynomial(&[0.0, 1.0, 1.0, 700.0], 0.5).unwrap();
        // z + z^2 + 700 z^3: second root at -1/700 inside radius 2e-3
        assert!(matches!(holomorphic_index(&h, c(0.0, 0.0)), Err(Error::ContourConflict { .. })));
    }

    #[test]
    fn multiplier_param_examples() {
        let e = std::f64::consts::E;
        assert!((multiplier_param(c(e, 0.0), 1).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let l = c(0.1, 0.2).exp();
        assert!((multiplier_param(l, 1).unwrap() - c(2.0, -4.0)).norm() < 1e-12);
        let n = 37.0_f64;
        assert!((multiplier_param(c((1.0 / n).exp(), 0.0), 1).unwrap() - c(n, 0.0)).norm() < 1e-11);
        assert!(matches!(multiplier_param(c(-1.0, 0.0), 1), Err(Error::BranchCut { .. })));
        assert!(matches!(multiplier_param(c(-1.0, 0.0), 2), Err(Error::UnitMultiplier)));
    }

    #[test]
    fn classify_examples() {
        let nt: Vec<_> = (1..=32).map(|n| c(1.0 / n as f64, 0.0).exp()).collect();
        assert_eq!(classify_approach(&nt, 1, 10.0).unwrap(), Approach::NonTangential);
        let tg: Vec<_> = (1..=32)
            .map(|n| {
                let n = n as f64;
                (c(1.0, 0.0) / c(n, n * n)).exp()
            })
            .collect();
        assert_eq!(classify_approach(&tg, 1, 10.0).unwrap(), Approach::Tangential);
        let diag: Vec<_> = (1..=32).map(|n| (c(1.0, 1.0) / n as f64).exp()).collect();
        assert_eq!(classify_approach(&diag, 1, 10.0).unwrap(), Approach::NonTangential);
        assert!(matches!(classify_approach(&diag[..5], 1, 10.0), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn bifurcation_examples() {
        let d = bifurcation_data(&quad(1.0), &quad(0.9), 1, 0.5).unwrap();
        assert!(d.origin_record.location.norm() < 1e-15);
        assert!((d.cycle[0].location - c(0.1, 0.0)).norm() < 1e-14);
        assert!((d.cycle[0].multiplier - c(1.1, 0.0)).norm() < 1e-13);
        assert!((d.delta - c(0.1, 0.0)).norm() < 1e-15);
        assert!((d.est2_ratios()[0] - 1.0).norm() < 1e-12);

        let d = bifurcation_data(&quad(1.0), &quad(1.05), 1, 0.5).unwrap();
        assert!((d.cycle[0].location - c(-0.05, 0.0)).norm() < 1e-14);
        assert!((d.cycle[0].multiplier - c(0.95, 0.0)).norm() < 1e-13);
        assert!((d.delta - c(-0.05, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bifurcation_of_period_two_family() {
        let a = (1.0_f64 / 50.0).exp();
        let d = bifurcation_data(&g_iterate(1.0), &g_iterate(a), 2, 0.5).unwrap();
        assert_eq!(d.cycle.len(), 2);
        // g(p) = -p gives p^2 = a - 1
        for r in &d.cycle {
            assert!((r.location * r.location - c(a - 1.0, 0.0)).norm() < 1e-13);
        }
        assert!((d.leading - c(-2.0, 0.0)).norm() < 1e-9);
        let want = 2.0 / (1.0 + a);
        for r in d.normalized_est2_ratios() {
            assert!((r - c(want, 0.0)).norm() < 1e-9);
        }
        assert!((d.rho - c(0.75, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn bifurcation_wrong_count() {
        let lin = AnalyticMap::real_polynomial(&[0.0, 0.5], 0.5).unwrap();
        assert!(matches!(
            bifurcation_data(&quad(1.0), &lin, 1, 0.5),
            Err(Error::WrongFixedPointCount { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn sector_examples() {
        let a1 = SectorSpec::new(1, 0.2, SectorCase::RepellingA).unwrap();
        assert_eq!(sector_label(c(0.1, 0.0), &a1), Some(1));
        let a2 = SectorSpec::new(2, 0.2, SectorCase::RepellingA).unwrap();
        assert_eq!(sector_label(c(0.0, 0.1), &a2), None);
        let b2 = SectorSpec::new(2, 0.2, SectorCase::AttractingB).unwrap();
        assert_eq!(sector_label(c(0.0, 0.1), &b2), Some(1));
        assert!(SectorSpec::new(2, 2.0, SectorCase::AttractingB).is_err());
    }

    #[test]
    fn sum_rule_examples() {
        let d = bifurcation_data(&quad(1.0), &quad(0.9), 1, 0.5).unwrap();
        let want = (1.0 / 0.9f64.ln() + 1.0 / 1.1f64.ln() - 1.0).abs();
        let dev = sum_rule_check(&d).unwrap();
        assert!((dev - want).abs() < 1e-10);
        assert!(dev < 0.01);
        let mut prev = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let l = (1.0 / n as f64).exp();
            let d = bifurcation_data(&quad(1.0), &quad(l), 1, 0.5).unwrap();
            let dev = sum_rule_check(&d).unwrap();
            assert!(dev < prev);
            prev = dev;
        }
    }

    #[test]
    fn record_json_field_names() {
        let fps = find_fixed_points(&quad(1.1), 0.5).unwrap();
        let v: serde_json::Value = serde_json::to_value(&fps[0]).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["big_lambda", "index", "location", "multiplicity", "multiplier", "resit"]);
        assert!(v["location"].is_array());
    }
}
