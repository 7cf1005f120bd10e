//! One runner per experiment kind. Rows are computed in parallel and
//! collected in input order, so results do not depend on the thread count.

use std::f64::consts::TAU;

use buffdyn_core::buffform::{residue_closed_form, BuffForm};
use buffdyn_core::cplx::TWO_PI_I;
use buffdyn_core::fixpoint::{bifurcation_data, multiplier_param, sum_rule_check, FixedPointRecord};
use buffdyn_core::flow::{trajectory, LinearField, NormalFormField, RotatedBuff, Trajectory, TrajectorySpec, TrajectoryStatus, VectorField};
use buffdyn_core::rays::{
    detect_gate_crossing, hausdorff_distance, landing_candidates, trace_ray_partial, uniform_parameter_distance, RayOptions,
    RayTail, RayTermination,
};
use buffdyn_core::rectify::{lift_path, verify_theorem_a, PathPolyline};
use buffdyn_core::{AnalyticMap, Complex, Error};
use log::info;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{
    format_complex, AuditSpec, Expectation, Experiment, ExperimentConfig, FamilySpec, FieldSpec, GateSpec, MapSpec, PortraitSpec,
    RaySpec, SpiralSpec, TheoremASpec,
};
use crate::error::{stage, Result};
use crate::report::{cx, Check, Outcome, Table};
use crate::svg::Figure;

/// Run the configured experiment without touching the file system.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    info!("running {} ({})", config.name, config.kind());
    match &config.experiment {
        Experiment::TheoremA { limit, family, sweep } => theorem_a(limit, family, sweep),
        Experiment::TheoremB { map, rays } => theorem_b(map, rays),
        Experiment::Est2 { limit, family, tolerance } => est2(limit, family, *tolerance),
        Experiment::SumRule { limit, family, envelope } => sum_rule(limit, family, *envelope),
        Experiment::Gate { map, rays, gate } => gate_experiment(map, rays, gate),
        Experiment::PhasePortrait(spec) => phase_portrait(spec),
        Experiment::Spiral(spec) => spiral(spec),
        Experiment::ResidueAudit(spec) => residue_audit(spec),
    }
}

fn outcome(checks: Vec<Check>, results: serde_json::Value, tables: Vec<Table>, figures: Vec<Figure>) -> Outcome {
    Outcome { checks, notes: Vec::new(), results, tables, figures }
}

fn build(spec: &MapSpec, what: &str) -> Result<AnalyticMap> {
    spec.build().map_err(stage(format!("build {what}")))
}

fn members(limit: &MapSpec, family: &FamilySpec) -> Result<Vec<(u32, AnalyticMap)>> {
    family
        .ns()
        .into_par_iter()
        .map(|n| Ok((n, build(&family.member(limit, n), &format!("family member n = {n}"))?)))
        .collect()
}

fn theorem_a(limit: &MapSpec, family: &FamilySpec, sweep: &TheoremASpec) -> Result<Outcome> {
    let limit_map = build(limit, "limit map")?;
    let fam = members(limit, family)?;
    let ns: Vec<u32> = fam.iter().map(|m| m.0).collect();
    let maps: Vec<AnalyticMap> = fam.into_iter().map(|m| m.1).collect();
    info!("cone sweep over {} members, radii {:?}", maps.len(), sweep.radii);
    let report = verify_theorem_a(&limit_map, &maps, family.q, sweep.epsilon, &sweep.radii, &sweep.grid)
        .map_err(stage("cone sweep"))?;
    let start_n = ns.get(report.family_index_start).copied();

    let mut table = Table::new("sweep", &["radius", "n", "forward", "backward", "points", "below_epsilon"]);
    for s in &report.sweeps {
        for (n, c) in ns.iter().zip(&s.members) {
            table.push(vec![s.radius.into(), (*n).into(), c.forward.into(), c.backward.into(), c.points.into(), (c.max() < sweep.epsilon).into()]);
        }
    }
    let pass = report.pass && report.radius_found > 0.0;
    let detail = match start_n {
        Some(n) if pass => format!(
            "radius {} from n = {n}: forward max {:.4}, inverse max {:.4} < epsilon {}",
            report.radius_found, report.max_forward, report.max_backward, sweep.epsilon
        ),
        _ => format!("no radius among {:?} works from any n; smallest radius max ratio {:.4}", sweep.radii, report.max_ratio),
    };
    let results = json!({ "start_n": start_n, "report": report });
    Ok(outcome(vec![Check::new("cone estimate", pass, detail)], results, vec![table], Vec::new()))
}

/// Strictly decreasing, or already at rounding level.
fn decreasing(values: &[f64], floor: f64) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || w[1] <= floor)
}

fn est2(limit: &MapSpec, family: &FamilySpec, tolerance: f64) -> Result<Outcome> {
    let limit_map = build(limit, "limit map")?;
    let fam = members(limit, family)?;
    let rows = fam
        .par_iter()
        .map(|(n, map)| {
            let data = bifurcation_data(&limit_map, map, family.q, map.validity_radius())
                .map_err(stage(format!("bifurcation data n = {n}")))?;
            let dev = data.normalized_est2_ratios().iter().map(|r| (r - 1.0).norm()).fold(0.0, f64::max);
            Ok((*n, data, dev))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("est2", &["n", "delta_re", "delta_im", "mu_re", "mu_im", "max_deviation"]);
    for (n, data, dev) in &rows {
        let [dr, di] = cx(data.delta);
        let [mr, mi] = cx(data.cycle_multiplier());
        table.push(vec![(*n).into(), dr, di, mr, mi, (*dev).into()]);
    }
    let devs: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let last = *devs.last().unwrap();
    let half = &devs[devs.len() / 2..];
    let dec = decreasing(half, 1e-12);
    let first_half_n = rows[devs.len() / 2].0;
    let checks = vec![
        Check::new("final deviation", last < tolerance, format!("|a p^q/delta - 1| = {last:.3e} at n = {} (< {tolerance})", rows.last().unwrap().0)),
        Check::new("decreasing", dec, format!("deviation decreasing over n = {first_half_n}..{}: {dec}", rows.last().unwrap().0)),
    ];
    let results = json!({
        "q": family.q,
        "leading_coefficient": rows[0].1.leading,
        "rho": rows[0].1.rho,
        "deviations": devs,
    });
    Ok(outcome(checks, results, vec![table], Vec::new()))
}

fn sum_rule(limit: &MapSpec, family: &FamilySpec, envelope: f64) -> Result<Outcome> {
    let limit_map = build(limit, "limit map")?;
    let fam = members(limit, family)?;
    let rows = fam
        .par_iter()
        .map(|(n, map)| {
            let data = bifurcation_data(&limit_map, map, family.q, map.validity_radius())
                .map_err(stage(format!("bifurcation data n = {n}")))?;
            let dev = sum_rule_check(&data).map_err(stage(format!("sum rule n = {n}")))?;
            let big_lambda = multiplier_param(data.origin_record.multiplier, 1).map_err(stage("Lambda"))?;
            let big_m = multiplier_param(data.cycle_multiplier(), 1).map_err(stage("M"))?;
            Ok((*n, big_lambda, big_m, data.rho, dev))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("sum_rule", &["n", "lambda_re", "lambda_im", "m_re", "m_im", "deviation", "n_times_deviation"]);
    let mut worst = 0.0_f64;
    let mut bad = Vec::new();
    for (n, l, m, _, dev) in &rows {
        let [lr, li] = cx(*l);
        let [mr, mi] = cx(*m);
        let scaled = dev * *n as f64;
        worst = worst.max(scaled);
        if scaled >= envelope {
            bad.push(*n);
        }
        table.push(vec![(*n).into(), lr, li, mr, mi, (*dev).into(), scaled.into()]);
    }
    let detail = if bad.is_empty() {
        format!("max n |Lambda + q M - rho| = {worst:.4} (< {envelope})")
    } else {
        format!("envelope {envelope}/n exceeded at n = {bad:?}")
    };
    let results = json!({ "rho": rows[0].3, "q": family.q, "max_scaled_deviation": worst });
    Ok(outcome(vec![Check::new("envelope", bad.is_empty(), detail)], results, vec![table], Vec::new()))
}

fn ray_options(rays: &RaySpec) -> RayOptions {
    RayOptions { dt: rays.dt, t_min: rays.t_min, landing_tol: rays.landing_tol }
}

fn trace(map: &AnalyticMap, rays: &RaySpec, what: &str) -> Result<RayTail> {
    trace_ray_partial(map, rays.theta, rays.period, &ray_options(rays)).map_err(stage(format!("trace ray for {what}")))
}

/// `|(P^q)'(z)|`.
fn cycle_multiplier(map: &AnalyticMap, z: Complex, q: u32) -> Result<f64> {
    let mut w = z;
    let mut d = Complex::new(1.0, 0.0);
    for _ in 0..q {
        d *= map.derivative(w).map_err(stage("landing multiplier"))?;
        w = map.evaluate(w).map_err(stage("landing multiplier"))?;
    }
    Ok(d.norm())
}

fn termination_label(t: RayTermination) -> String {
    match t {
        RayTermination::Landed => "landed".into(),
        RayTermination::ReachedTMin => "reached_t_min".into(),
        RayTermination::NewtonFailure { t } => format!("newton_failure_at_{t}"),
    }
}

fn ray_samples(table: &mut Table, s: f64, ray: &RayTail) {
    for (t, z) in &ray.samples {
        let [re, im] = cx(*z);
        table.push(vec![s.into(), (*t).into(), re, im]);
    }
}

fn ray_figure(name: &str, title: &str, view: f64, limit: &RayTail, rays: &[(f64, RayTail)], marks: &[Complex]) -> Figure {
    let mut fig = Figure::square(name, title, Complex::new(0.0, 0.0), view);
    let n = rays.len().max(1) as f64;
    for (k, (_, ray)) in rays.iter().enumerate() {
        let g = (60.0 + 140.0 * (1.0 - k as f64 / n)) as u8;
        fig.polyline(&ray.compactified(), &format!("rgb({g},{g},255)"), 1.0);
    }
    fig.polyline(&limit.compactified(), "black", 1.5);
    for z in marks {
        fig.dot(*z, 3.0, "crimson");
    }
    fig
}

fn theorem_b(map: &MapSpec, rays: &RaySpec) -> Result<Outcome> {
    let limit_map = build(map, "limit map")?;
    let limit = trace(&limit_map, rays, "the limit map")?;
    let rows = rays
        .steps
        .par_iter()
        .map(|&(k, s)| {
            let spec = rays.member(map, s);
            let m = build(&spec, &format!("map for s = {s}"))?;
            let ray = trace(&m, rays, &format!("s = {s}"))?;
            let uniform = uniform_parameter_distance(&ray, &limit).map_err(stage(format!("uniform distance s = {s}")))?;
            let hausdorff = hausdorff_distance(&ray, &limit).map_err(stage(format!("Hausdorff distance s = {s}")))?;
            let mult = match ray.landing {
                Some(l) => Some(cycle_multiplier(&m, l, rays.period)?),
                None => None,
            };
            Ok((k, s, spec.coefficients[rays.slot], ray, uniform, hausdorff, mult))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        "convergence",
        &["k", "s", "coefficient_re", "coefficient_im", "termination", "landing_re", "landing_im", "landing_multiplier_abs", "uniform_distance", "hausdorff_distance"],
    );
    let mut samples = Table::samples("rays", &["s", "t", "re", "im"]);
    ray_samples(&mut samples, 0.0, &limit);
    for (k, s, coef, ray, uniform, hausdorff, mult) in &rows {
        let [cr, ci] = cx(*coef);
        table.push(vec![
            (*k).map(i64::from).into(),
            (*s).into(),
            cr,
            ci,
            termination_label(ray.termination).into(),
            ray.landing.map(|l| l.re).into(),
            ray.landing.map(|l| l.im).into(),
            (*mult).into(),
            (*uniform).into(),
            (*hausdorff).into(),
        ]);
        ray_samples(&mut samples, *s, ray);
    }

    let dists: Vec<f64> = rows.iter().map(|r| r.4).collect();
    let landed = rows.iter().all(|r| r.3.termination == RayTermination::Landed);
    let repelling = rows.iter().all(|r| r.6.is_some_and(|m| m > 1.0));
    let dec = dists.windows(2).all(|w| w[1] < w[0]);
    let last = *dists.last().unwrap();
    let converged = landed && repelling && dec && last < rays.tolerance;
    let verdict = if converged { "uniform convergence detected" } else { "no uniform convergence detected" };
    let checks = match rays.expect {
        Expectation::Converge => vec![
            Check::new("landing", landed && repelling, format!("every ray lands at a repelling fixed point: {}", landed && repelling)),
            Check::new("convergence", dec && last < rays.tolerance, format!("uniform distance decreasing: {dec}, final {last:.4e} (< {})", rays.tolerance)),
        ],
        Expectation::Describe => Vec::new(),
    };
    let mut marks: Vec<Complex> = rows.iter().filter_map(|r| r.3.landing).collect();
    marks.extend(limit.landing);
    let mut fig = ray_figure("rays", "external rays and their landing points", rays.view, &limit, &rows.iter().map(|r| (r.1, r.3.clone())).collect::<Vec<_>>(), &marks);
    fig.note(verdict);
    let mut out = outcome(
        checks,
        json!({
            "verdict": verdict,
            "distances": dists,
            "limit_termination": limit.termination,
            "limit_landing": limit.landing,
        }),
        vec![table, samples],
        vec![fig],
    );
    out.notes.push(verdict.into());
    Ok(out)
}

fn gate_experiment(map: &MapSpec, rays: &RaySpec, gate: &GateSpec) -> Result<Outcome> {
    let rows = rays
        .steps
        .par_iter()
        .map(|&(k, s)| {
            let spec = rays.member(map, s);
            let m = build(&spec, &format!("map for s = {s}"))?;
            let ray = trace(&m, rays, &format!("s = {s}"))?;
            let fixed = landing_candidates(&m, rays.period).map_err(stage(format!("fixed points s = {s}")))?;
            let inside = fixed.iter().filter(|p| (*p - gate.center).norm() <= gate.radius * (1.0 + 1e-9)).count();
            let (crossing, note) = match detect_gate_crossing(&ray, &fixed, gate.center, gate.radius) {
                Ok(b) => (b, String::new()),
                Err(e @ (Error::RayLandsInside { .. } | Error::RayMissesDisk)) => (false, e.to_string()),
                Err(e) => return Err(stage(format!("gate s = {s}"))(e)),
            };
            Ok((k, s, spec.coefficients[rays.slot], ray, fixed, inside, crossing, note))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("gate", &["k", "s", "coefficient_re", "coefficient_im", "fixed_points_in_disk", "gate_crossing", "note"]);
    let mut samples = Table::samples("rays", &["s", "t", "re", "im"]);
    let mut figures = Vec::new();
    for (k, s, coef, ray, fixed, inside, crossing, note) in &rows {
        let [cr, ci] = cx(*coef);
        table.push(vec![(*k).map(i64::from).into(), (*s).into(), cr, ci, (*inside).into(), (*crossing).into(), note.as_str().into()]);
        ray_samples(&mut samples, *s, ray);
        let mut fig = Figure::square(&format!("gate_{}", figures.len() + 1), &format!("gate crossing, s = {s}"), gate.center, 2.5 * gate.radius);
        fig.circle(gate.center, gate.radius, "gray");
        fig.polyline(&ray.compactified(), "black", 1.5);
        for p in fixed {
            fig.dot(*p, 3.0, "crimson");
        }
        fig.note(&format!("gate_crossing = {crossing}"));
        figures.push(fig);
    }
    let all = rows.iter().all(|r| r.6);
    let flags: Vec<bool> = rows.iter().map(|r| r.6).collect();
    let detail = rows.iter().map(|r| format!("s = {}: {}", r.1, r.6)).collect::<Vec<_>>().join(", ");
    let results = json!({ "gate_crossing": flags, "center": gate.center, "radius": gate.radius });
    Ok(outcome(vec![Check::new("gate crossing", all, detail)], results, vec![table, samples], figures))
}

/// Restrict a field to a disk so that trajectories stop at its boundary.
struct Clipped<'a> {
    inner: &'a dyn VectorField,
    center: Complex,
    radius: f64,
}

impl VectorField for Clipped<'_> {
    fn value(&self, z: Complex) -> buffdyn_core::Result<Complex> {
        if (z - self.center).norm() > self.radius {
            return Err(Error::DomainExceeded { z, radius: self.radius });
        }
        self.inner.value(z)
    }

    fn singularities(&self) -> Vec<Complex> {
        self.inner.singularities()
    }

    fn dual_residue(&self, p: Complex) -> buffdyn_core::Result<Complex> {
        self.inner.dual_residue(p)
    }
}

fn status_label(s: TrajectoryStatus) -> &'static str {
    match s {
        TrajectoryStatus::Completed => "completed",
        TrajectoryStatus::LeftDomain => "left_domain",
        TrajectoryStatus::NearSingularity => "near_singularity",
        TrajectoryStatus::TerminatedAtSingularity => "terminated_at_singularity",
    }
}

fn phase_portrait(spec: &PortraitSpec) -> Result<Outcome> {
    let form;
    let buff;
    let normal;
    let linear;
    let (field, title): (&dyn VectorField, String) = match &spec.field {
        FieldSpec::Buff { map, alpha } => {
            form = BuffForm::new(build(map, "map")?).map_err(stage("Buff form"))?;
            buff = RotatedBuff::new(&form, *alpha).map_err(stage("field"))?;
            (&buff, format!("trajectories of {} chi_f", format_complex(*alpha)))
        }
        FieldSpec::NormalForm { m, c, alpha } => {
            normal = NormalFormField { m: *m, c: *c, alpha: *alpha };
            (&normal, format!("trajectories of w^{m}/(1 + ({}) w^{})", format_complex(*c), m - 1))
        }
        FieldSpec::Linear { a, center } => {
            linear = LinearField { a: *a, center: *center };
            (&linear, format!("trajectories of ({}) (z - ({}))", format_complex(*a), format_complex(*center)))
        }
    };
    let clipped = Clipped { inner: field, center: spec.center, radius: spec.disk };
    let singular: Vec<Complex> =
        field.singularities().into_iter().filter(|p| (p - spec.center).norm() <= spec.disk).collect();
    let n = spec.trajectories as usize;
    let seeds: Vec<Complex> = (0..n)
        .map(|k| spec.center + Complex::from_polar(spec.ring * spec.disk, TAU * (k as f64 + 0.25) / n as f64))
        .collect();
    let stop = 1e-3 * spec.disk;
    let jobs: Vec<(usize, f64)> = (0..n).flat_map(|k| [(k, 1.0), (k, -1.0)]).collect();
    let trajs = jobs
        .par_iter()
        .map(|&(k, dir)| {
            let ts = TrajectorySpec::new(Complex::new(dir, 0.0), spec.t_max, spec.step, stop).map_err(stage("trajectory spec"))?;
            let tr: Trajectory = trajectory(&clipped, seeds[k], &ts).map_err(stage(format!("trajectory {k}")))?;
            Ok((k, dir, tr))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Table::new("trajectories", &["trajectory", "direction", "status", "steps", "end_re", "end_im"]);
    let mut samples = Table::samples("samples", &["trajectory", "direction", "t", "re", "im"]);
    let mut fig = Figure::square("portrait", &title, spec.center, spec.disk);
    fig.circle(spec.center, spec.disk, "gray");
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    for (k, dir, tr) in &trajs {
        let [er, ei] = cx(tr.end());
        summary.push(vec![(*k).into(), (*dir as i64).into(), status_label(tr.status).into(), (tr.points.len() - 1).into(), er, ei]);
        *counts.entry(status_label(tr.status)).or_default() += 1;
        for (t, z) in tr.times.iter().zip(&tr.points) {
            let [re, im] = cx(*z);
            samples.push(vec![(*k).into(), (*dir as i64).into(), (*t * dir).into(), re, im]);
        }
        fig.polyline(&tr.points, if *dir > 0.0 { "steelblue" } else { "darkorange" }, 1.0);
    }
    for p in &seeds {
        fig.dot(*p, 2.0, "black");
    }
    for p in &singular {
        fig.dot(*p, 4.0, "crimson");
    }
    fig.note("blue: forward time, orange: backward time, red: singular points");
    let results = json!({ "singularities": singular, "status_counts": counts, "seeds": seeds });
    let checks = vec![Check::new("rendered", true, format!("{} trajectories from {n} seeds", trajs.len()))];
    Ok(outcome(checks, results, vec![summary, samples], vec![fig]))
}

fn spiral(spec: &SpiralSpec) -> Result<Outcome> {
    let form = BuffForm::new(build(&spec.map, "map")?).map_err(stage("Buff form"))?;
    let circle = PathPolyline::circle(spec.center, spec.r, spec.vertices as usize, 0.0).map_err(stage("circle"))?;
    let lift = lift_path(&form, &circle, Complex::new(0.0, 0.0)).map_err(stage("lift circle"))?;
    let enclosed: Vec<&FixedPointRecord> = form.fixed_points().iter().filter(|r| (r.location - spec.center).norm() < spec.r).collect();
    let mut expected = Complex::new(0.0, 0.0);
    for rec in &enclosed {
        expected += residue_closed_form(rec).map_err(stage("closed-form residue"))?;
    }
    expected *= TWO_PI_I;
    let translation = lift.translation();
    let err = (translation - expected).norm();
    let mut table = Table::samples("lift", &["t_index", "base_re", "base_im", "z_re", "z_im"]);
    for (k, (z, w)) in lift.points.iter().zip(&lift.values).enumerate() {
        let [br, bi] = cx(*z);
        let [zr, zi] = cx(*w);
        table.push(vec![k.into(), br, bi, zr, zi]);
    }
    let mut fig = Figure::fitted("spiral", &format!("lift of |z - ({})| = {}", format_complex(spec.center), spec.r), lift.values.iter().copied(), 1e-3);
    fig.polyline(&lift.values, "black", 1.5);
    fig.dot(lift.start_value, 4.0, "seagreen");
    fig.dot(lift.end_value(), 4.0, "crimson");
    fig.note(&format!("net translation {}", format_complex(round(translation))));
    fig.note(&format!("2 pi i (sum of residues) {}", format_complex(round(expected))));
    fig.note(&format!("difference {err:.3e}"));
    let records: Vec<_> = enclosed.iter().map(|r| (*r).clone()).collect();
    let results = json!({
        "translation": translation,
        "expected": expected,
        "difference": err,
        "enclosed": records,
    });
    let checks = vec![Check::new("translation audit", err < spec.tolerance, format!("|translation - 2 pi i sum res| = {err:.3e} (< {:e})", spec.tolerance))];
    Ok(outcome(checks, results, vec![table], vec![fig]))
}

fn round(z: Complex) -> Complex {
    let r = |x: f64| (x * 1e9).round() / 1e9;
    Complex::new(r(z.re), r(z.im))
}

/// Circle radius about `p` that keeps clear of the other fixed points and
/// the validity boundary.
fn loop_radius(form: &BuffForm, p: Complex) -> f64 {
    let others = form
        .fixed_points()
        .iter()
        .filter(|r| r.location != p)
        .map(|r| (r.location - p).norm())
        .fold(f64::INFINITY, f64::min);
    (0.3 * others).min(0.3 * (form.map().validity_radius() - p.norm())).min(0.1)
}

fn residue_audit(spec: &AuditSpec) -> Result<Outcome> {
    let per_map = spec
        .maps
        .par_iter()
        .map(|m| {
            let label = if m.label.is_empty() { "map".to_string() } else { m.label.clone() };
            let form = BuffForm::new(build(m, &label)?).map_err(stage(format!("Buff form of {label}")))?;
            let mut rows = Vec::new();
            for rec in form.fixed_points() {
                let at = |what: &str| stage(format!("{what} of {label} at {}", format_complex(rec.location)));
                let r = loop_radius(&form, rec.location);
                let closed = residue_closed_form(rec).map_err(at("closed-form residue"))?;
                let numeric = form.residue_numeric(rec.location, r).map_err(at("numeric residue"))?;
                let circle = PathPolyline::circle(rec.location, r, 64, 0.1).map_err(at("loop"))?;
                let lift = lift_path(&form, &circle, Complex::new(0.0, 0.0)).map_err(at("loop lift"))?;
                let mono_err = (lift.translation() - TWO_PI_I * closed).norm();
                rows.push((rec.clone(), closed, numeric, mono_err));
            }
            Ok((label, rows))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        "residues",
        &[
            "map", "location_re", "location_im", "multiplier_re", "multiplier_im", "multiplicity", "closed_re", "closed_im", "numeric_re",
            "numeric_im", "residue_error", "monodromy_error",
        ],
    );
    let (mut worst_res, mut worst_mono, mut count) = (0.0_f64, 0.0_f64, 0usize);
    let mut records = serde_json::Map::new();
    for (label, rows) in &per_map {
        for (rec, closed, numeric, mono) in rows {
            let e = (closed - numeric).norm();
            worst_res = worst_res.max(e);
            worst_mono = worst_mono.max(*mono);
            count += 1;
            let [lr, li] = cx(rec.location);
            let [mr, mi] = cx(rec.multiplier);
            let [cr, ci] = cx(*closed);
            let [nr, ni] = cx(*numeric);
            table.push(vec![label.as_str().into(), lr, li, mr, mi, rec.multiplicity.into(), cr, ci, nr, ni, e.into(), (*mono).into()]);
        }
        let recs: Vec<&FixedPointRecord> = rows.iter().map(|r| &r.0).collect();
        records.insert(label.clone(), serde_json::to_value(recs)?);
    }
    let checks = vec![
        Check::new("residue", worst_res < spec.tolerance, format!("{count} fixed points, max |numeric - closed form| = {worst_res:.3e} (< {:e})", spec.tolerance)),
        Check::new("monodromy", worst_mono < spec.monodromy_tolerance, format!("max |loop translation - 2 pi i res| = {worst_mono:.3e} (< {:e})", spec.monodromy_tolerance)),
    ];
    let results = json!({ "records": records, "max_residue_error": worst_res, "max_monodromy_error": worst_mono });
    Ok(outcome(checks, results, vec![table], Vec::new()))
}
