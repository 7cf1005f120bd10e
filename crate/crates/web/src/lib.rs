//! Browser bindings: fixed-point analysis, lifted circles and external rays.
//! Every export returns a JSON string; failures come back as `{"error": ...}`
//! so the page never has to catch exceptions.

use buffdyn_core::buffform::{residue_closed_form, BuffForm};
use buffdyn_core::cplx::TWO_PI_I;
use buffdyn_core::fixpoint::FixedPointRecord;
use buffdyn_core::rays::{trace_ray_partial, RayAngle, RayOptions, RayTermination};
use buffdyn_core::rectify::{lift_path, PathPolyline};
use buffdyn_core::{AnalyticMap, Complex};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

/// Longest ray tail handed to the page.
const MAX_RAY_SAMPLES: usize = 20_000;

fn map_from_pairs(coefficients: &[f64], radius: f64) -> Result<AnalyticMap, String> {
    if !coefficients.len().is_multiple_of(2) {
        return Err("coefficients must come in (re, im) pairs".into());
    }
    let coeffs: Vec<Complex> = coefficients.chunks(2).map(|p| Complex::new(p[0], p[1])).collect();
    AnalyticMap::polynomial(coeffs, radius).map_err(|e| e.to_string())
}

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    let value = match result {
        Ok(v) => serde_json::to_value(v).unwrap_or_else(|e| serde_json::json!({ "error": e.to_string() })),
        Err(e) => serde_json::json!({ "error": e }),
    };
    value.to_string()
}

#[derive(Serialize)]
struct PointInfo {
    #[serde(flatten)]
    record: FixedPointRecord,
    residue: Complex,
}

#[derive(Serialize)]
struct Analysis {
    points: Vec<PointInfo>,
}

/// Fixed points of the polynomial with interleaved `(re, im)` coefficients
/// in `|z| <= radius`, with index, résidu itératif and Buff-form residue.
#[wasm_bindgen]
pub fn analyze(coefficients: &[f64], radius: f64) -> String {
    respond((|| {
        let form = BuffForm::new(map_from_pairs(coefficients, radius)?).map_err(|e| e.to_string())?;
        let points = form
            .fixed_points()
            .iter()
            .map(|r| Ok(PointInfo { record: r.clone(), residue: residue_closed_form(r).map_err(|e| e.to_string())? }))
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Analysis { points })
    })())
}

#[derive(Serialize)]
struct Spiral {
    base: Vec<Complex>,
    lift: Vec<Complex>,
    translation: Complex,
    expected: Complex,
}

/// Lift of the circle `|z - center| = r` to rectifying coordinates, with its
/// net translation and `2 pi i` times the enclosed residues.
#[wasm_bindgen]
pub fn lift_circle(coefficients: &[f64], radius: f64, center_re: f64, center_im: f64, r: f64) -> String {
    respond((|| {
        let form = BuffForm::new(map_from_pairs(coefficients, radius)?).map_err(|e| e.to_string())?;
        let center = Complex::new(center_re, center_im);
        let circle = PathPolyline::circle(center, r, 256, 0.0).map_err(|e| e.to_string())?;
        let lift = lift_path(&form, &circle, Complex::new(0.0, 0.0)).map_err(|e| e.to_string())?;
        let mut expected = Complex::new(0.0, 0.0);
        for rec in form.fixed_points().iter().filter(|p| (p.location - center).norm() < r) {
            expected += residue_closed_form(rec).map_err(|e| e.to_string())?;
        }
        Ok(Spiral { translation: lift.translation(), expected: expected * TWO_PI_I, base: lift.points, lift: lift.values })
    })())
}

#[derive(Serialize)]
struct Ray {
    points: Vec<Complex>,
    landing: Option<Complex>,
    termination: RayTermination,
}

/// External ray of angle `num/den` turns and period `period` for the
/// polynomial with the given coefficients, traced down to potential level
/// `d^(period * t_min)`.
#[wasm_bindgen]
pub fn external_ray(coefficients: &[f64], num: u32, den: u32, period: u32, t_min: f64) -> String {
    respond((|| {
        let map = map_from_pairs(coefficients, 1e6)?;
        let theta = RayAngle::new(num as u64, den as u64).map_err(|e| e.to_string())?;
        let opts = RayOptions { t_min, ..Default::default() };
        let ray = trace_ray_partial(&map, theta, period, &opts).map_err(|e| e.to_string())?;
        // the first samples sit near potential 16, far outside any picture
        let points: Vec<Complex> = ray.points().filter(|z| z.norm() < 10.0).take(MAX_RAY_SAMPLES).collect();
        Ok(Ray { points, landing: ray.landing, termination: ray.termination })
    })())
}
