use std::f64::consts::TAU;
use std::str::FromStr;

use buffdyn::experiments::run;
use buffdyn::report::{Cell, Outcome, Table};
use buffdyn::ExperimentConfig;
use buffdyn_core::Complex;

fn outcome(text: &str) -> Outcome {
    run(&ExperimentConfig::from_str(text).unwrap()).unwrap()
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(x) => *x,
        Cell::Int(k) => *k as f64,
        other => panic!("not a number: {other:?}"),
    }
}

fn column(t: &Table, name: &str) -> Vec<f64> {
    let k = t.columns.iter().position(|c| c == name).unwrap();
    t.rows.iter().map(|r| num(&r[k])).collect()
}

fn spiral_translation(coeffs: &str, radius: f64, center: &str, r: f64) -> (Outcome, Complex) {
    let o = outcome(&format!(
        "experiment = spiral\n[map]\ncoefficients = {coeffs}\nradius = {radius}\n[spiral]\ncenter = {center}\nr = {r}\n"
    ));
    let t = &o.results["translation"];
    let z = Complex::new(t[0].as_f64().unwrap(), t[1].as_f64().unwrap());
    (o, z)
}

#[test]
fn theorem_a_quadratic_family_passes() {
    let o = outcome(
        "experiment = theorem_a\n[map]\ncoefficients = 0, 1, 1\nradius = 0.3\n[family]\nn = 8..64\n[theorem_a]\nepsilon = 0.25\n",
    );
    assert!(o.pass(), "{:?}", o.checks);
    assert!(o.results["report"]["radius_found"].as_f64().unwrap() > 0.0);
    assert!(o.results["start_n"].as_u64().unwrap() <= 64);
}

#[test]
fn theorem_b_table_lands_at_repelling_fixed_points() {
    let o = outcome(
        "experiment = theorem_b\n[map]\ncoefficients = 0.25, 0, 1\nradius = 1e6\n[rays]\nk = 2..8\nt_min = -4096\n",
    );
    assert!(o.pass(), "{:?}", o.checks);
    let t = o.table("convergence").unwrap();
    let s = column(t, "s");
    let landing = column(t, "landing_re");
    let c = column(t, "coefficient_re");
    for k in 0..s.len() {
        // fixed points of z^2 + c are (1 +- sqrt(1 - 4c))/2
        let repelling = (1.0 + (1.0 - 4.0 * c[k]).sqrt()) / 2.0;
        assert!((landing[k] - repelling).abs() < 1e-6, "{} vs {repelling}", landing[k]);
        assert!((repelling - (1.0 + 2.0 * s[k]) / 2.0).abs() < 1e-12);
    }
    let d = column(t, "uniform_distance");
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    assert!(*d.last().unwrap() < 1e-2);
}

#[test]
fn tangential_run_is_descriptive() {
    // c = 1/4 + s^2 i: the fixed ray no longer follows a real segment
    let o = outcome(
        "experiment = theorem_b\n[map]\ncoefficients = 0.25, 0, 1\nradius = 1e6\n[rays]\nshift = 1i\nk = 2..4\nexpect = describe\n",
    );
    assert!(o.checks.is_empty());
    assert!(o.pass());
    assert!(o.results["verdict"].as_str().unwrap().contains("uniform convergence"));
}

#[test]
fn gate_at_s_one_tenth() {
    let o = outcome(
        "experiment = gate\n[map]\ncoefficients = 0.25, 0, 1\nradius = 1e6\n[rays]\nshift = 1\ns = 0.1\nt_min = -256\n[gate]\ncenter = 0.5\nradius = 0.2\n",
    );
    assert_eq!(o.results["gate_crossing"], serde_json::json!([true]));
    assert!(o.pass());
}

#[test]
fn spiral_of_parabolic_quadratic() {
    let (o, z) = spiral_translation("0, 1, 1", 0.3, "0", 0.1);
    assert!((z - Complex::new(0.0, TAU)).norm() < 1e-6, "{z}");
    assert!(o.pass());
}

#[test]
fn spiral_of_perturbed_quadratic() {
    // both fixed points 0 and 0.1 inside the circle
    let want = Complex::new(0.0, TAU) * (1.0 / 0.9f64.ln() + 1.0 / 1.1f64.ln());
    for (center, r) in [("0.05", 0.1), ("0", 0.2)] {
        let (o, z) = spiral_translation("0, 0.9, 1", 0.3, center, r);
        assert!((z - want).norm() < 1e-6, "{z} vs {want}");
        assert!(o.pass());
    }
}

#[test]
fn spiral_of_linear_map_is_a_segment() {
    let (o, z) = spiral_translation("0, 2", 2.0, "0", 1.0);
    assert!((z - Complex::new(0.0, TAU / 2f64.ln())).norm() < 1e-6, "{z}");
    let lift = o.table("lift").unwrap();
    for re in column(lift, "z_re") {
        assert!(re.abs() < 1e-9);
    }
    let im = column(lift, "z_im");
    assert!(im.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rotation_field_draws_circles() {
    let o = outcome(
        "experiment = phase_portrait\n[portrait]\nfield = linear\na = 1i\ndisk = 1\ntrajectories = 6\nt_max = 6.3\nstep = 0.05\n",
    );
    let t = o.table("samples").unwrap();
    let (re, im) = (column(t, "re"), column(t, "im"));
    for (x, y) in re.iter().zip(&im) {
        assert!((x.hypot(*y) - 0.5).abs() < 1e-6);
    }
    let status = o.table("trajectories").unwrap();
    assert!(status.rows.iter().all(|r| r[2] == Cell::Text("completed".into())));
}

#[test]
fn normal_form_trajectories_reach_zero_in_one_direction() {
    let o = outcome(
        "experiment = phase_portrait\n[portrait]\nfield = normal_form\nm = 2\nc = 0.2+1i\ndisk = 0.8\ntrajectories = 12\nt_max = 200\n",
    );
    let t = o.table("trajectories").unwrap();
    let (re, im) = (column(t, "end_re"), column(t, "end_im"));
    for seed in 0..12 {
        let ends: Vec<f64> = (0..2).map(|d| re[2 * seed + d].hypot(im[2 * seed + d])).collect();
        assert!(ends.iter().any(|e| *e < 0.02), "seed {seed}: {ends:?}");
    }
}

#[test]
fn quadratic_portrait_marks_both_fixed_points() {
    let o = outcome(
        "experiment = phase_portrait\n[map]\ncoefficients = 0, 0.9, 1\nradius = 0.3\n[portrait]\ncenter = 0.05\ndisk = 0.2\ntrajectories = 8\nt_max = 10\nstep = 0.01\n",
    );
    let s = o.results["singularities"].as_array().unwrap();
    assert_eq!(s.len(), 2);
    let svg = o.figure("portrait").unwrap().render();
    assert_eq!(svg.matches(r#"r="4" fill="crimson""#).count(), 2);
}

#[test]
fn est2_and_sum_rule_pass_on_desk_families() {
    let o = outcome(
        "experiment = est2\n[map]\ncoefficients = 0, -1, 0, 1\npower = 2\nradius = 0.4\n[family]\nn = 16..64\nq = 2\n",
    );
    assert!(o.pass(), "{:?}", o.checks);
    let o = outcome("experiment = sum_rule\n[map]\ncoefficients = 0, 1, 1\nradius = 0.4\n[family]\nn = 16..64\n");
    assert!(o.pass(), "{:?}", o.checks);
    let dev = column(o.table("sum_rule").unwrap(), "deviation");
    assert!(dev.iter().enumerate().all(|(k, d)| *d < 2.0 / (16 + k) as f64));
}

#[test]
fn q1_est2_ratio_is_exact() {
    let o = outcome("experiment = est2\n[map]\ncoefficients = 0, 1, 1\nradius = 0.4\n[family]\nn = 8..32\n");
    for d in column(o.table("est2").unwrap(), "max_deviation") {
        assert!(d < 1e-12);
    }
    assert!(o.pass());
}

#[test]
fn residue_audit_records_have_spec_field_names() {
    let o = outcome(
        "experiment = residue_audit\n[map.a]\ncoefficients = 0, 1, 1\nradius = 0.4\n[map.b]\ncoefficients = 0, 0.9, 1\nradius = 0.4\n",
    );
    assert!(o.pass());
    let rec = &o.results["records"]["b"][0];
    let mut keys: Vec<&str> = rec.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["big_lambda", "index", "location", "multiplicity", "multiplier", "resit"]);
    assert_eq!(rec["location"].as_array().unwrap().len(), 2);
    // the parabolic point has no logarithmic parameter
    assert!(o.results["records"]["a"][0]["big_lambda"].is_null());
}

#[test]
fn failing_audit_is_reported_not_raised() {
    let o = outcome("experiment = spiral\n[map]\ncoefficients = 0, 1, 1\nradius = 0.3\n[spiral]\nr = 0.1\ntolerance = 1e-300\n");
    assert!(!o.pass());
}

#[test]
fn stage_is_named_in_errors() {
    // the circle passes through the fixed point 0.1
    let cfg = ExperimentConfig::from_str("experiment = spiral\n[map]\ncoefficients = 0, 0.9, 1\nradius = 0.3\n[spiral]\nr = 0.1\n").unwrap();
    let err = run(&cfg).unwrap_err().to_string();
    assert!(err.starts_with("lift circle"), "{err}");
}
