//! Browser bindings for the impact model. Each export takes plain numbers and
//! returns a JSON string for the page to plot.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crashsim_core::dynamics::DEFAULT_MAX_TIME;
use crashsim_core::{
    collision_threshold_altitude, energy_distribution_curve, fit_damping, mse_loss,
    peak_acceleration, simulate_contact, synthesize_peaks, DropScenario, Error, FilterSpec,
    FixedParams, ImpactParams, PeakMode, SynthConfig,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const LOSS_CURVE_POINTS: usize = 80;

fn scenario(altitude_m: f64, clearance_mm: f64, cutoff_hz: f64) -> DropScenario {
    DropScenario {
        clearance: clearance_mm * 1e-3,
        sensor_cutoff: cutoff_hz,
        ..DropScenario::from_altitude(altitude_m)
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn simulate_json(
    mass: f64,
    damping: f64,
    stiffness: f64,
    altitude_cm: f64,
    clearance_mm: f64,
    cutoff_hz: f64,
) -> Result<Value, Error> {
    let params = ImpactParams::new(mass, damping, stiffness)?;
    let sc = scenario(altitude_cm / 100.0, clearance_mm, cutoff_hz);
    sc.validate()?;
    let traj = simulate_contact(&params, &sc, DEFAULT_MAX_TIME)?;
    let spec = FilterSpec::new(sc.sensor_cutoff, sc.sample_rate)?;
    let filtered = crashsim_core::filtered_proper_series(&traj, &spec, params.gravity)?;
    let peaks = peak_acceleration(&traj, params.gravity)?;
    let filtered_peak = filtered.iter().fold(0.0_f64, |m, v| m.max(*v));
    Ok(json!({
        "termination": traj.termination.as_str(),
        "impact_velocity": traj.impact_velocity,
        "x_max": traj.max_compression(),
        "raw_peak": peaks.raw_peak,
        "proper_peak": peaks.proper_peak,
        "filtered_peak": filtered_peak,
        "damping_ratio": params.damping_ratio(),
        "t": traj.samples.iter().map(|s| s.t).collect::<Vec<_>>(),
        "x": traj.samples.iter().map(|s| s.x).collect::<Vec<_>>(),
        "proper": traj.samples.iter().map(|s| (s.a - params.gravity).abs()).collect::<Vec<_>>(),
        "filtered": filtered,
    }))
}

fn energy_json(
    mass: f64,
    damping: f64,
    stiffness: f64,
    clearance_mm: f64,
    max_altitude_m: f64,
    points: usize,
) -> Result<Value, Error> {
    let params = ImpactParams::new(mass, damping, stiffness)?;
    if !(max_altitude_m > 0.0) || !max_altitude_m.is_finite() {
        return Err(Error::Config(format!("max altitude must be > 0, got {max_altitude_m}")));
    }
    if points < 2 {
        return Err(Error::Config("need at least 2 altitude points".into()));
    }
    let template = scenario(0.0, clearance_mm, DropScenario::default().sensor_cutoff);
    let altitudes: Vec<f64> = (1..=points)
        .map(|i| max_altitude_m * i as f64 / points as f64)
        .collect();
    let curve = energy_distribution_curve(&params, &template, &altitudes)?;
    let threshold = collision_threshold_altitude(&params, &template)?;
    let frac = |f: fn(&crashsim_core::EnergyFractions) -> f64| {
        curve.iter().map(|(_, b)| f(&b.fractions)).collect::<Vec<_>>()
    };
    Ok(json!({
        "altitude": altitudes,
        "spring": frac(|f| f.spring),
        "damper": frac(|f| f.damper),
        "collision": frac(|f| f.collision),
        "threshold_m": finite_or_null(threshold),
    }))
}

fn fit_json(
    mass: f64,
    true_damping: f64,
    stiffness: f64,
    noise: f64,
    repeats: usize,
    seed: u64,
) -> Result<Value, Error> {
    let params = ImpactParams::new(mass, true_damping, stiffness)?;
    let template = DropScenario::default();
    let config = SynthConfig {
        altitudes: vec![0.5, 1.0, 1.5],
        repeats,
        noise,
        seed,
        mode: PeakMode::Filtered,
    };
    let observations = synthesize_peaks(&params, &template, &config)?;
    let fixed = FixedParams::new(mass, stiffness);
    let bracket = fixed.default_bracket();
    let fit = fit_damping(&fixed, &observations, bracket)?;
    let (lo, hi) = bracket;
    let cs: Vec<f64> = (0..LOSS_CURVE_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (LOSS_CURVE_POINTS - 1) as f64)
        .collect();
    let losses = cs
        .iter()
        .map(|&c| mse_loss(c, &fixed, &observations))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({
        "damping": fit.damping,
        "loss": fit.loss,
        "evaluations": fit.evaluations,
        "at_boundary": fit.at_boundary,
        "observations": observations
            .iter()
            .map(|o| json!({"altitude_m": o.drop_altitude, "peak": o.measured_peak}))
            .collect::<Vec<_>>(),
        "curve_c": cs,
        "curve_loss": losses,
    }))
}

fn to_js(result: Result<Value, Error>) -> Result<String, JsValue> {
    result
        .map(|v| v.to_string())
        .map_err(|e| JsValue::from_str(&e.to_string()))
}

/// One drop: trajectory, raw and filtered proper acceleration, peaks.
#[wasm_bindgen]
pub fn simulate(
    mass: f64,
    damping: f64,
    stiffness: f64,
    altitude_cm: f64,
    clearance_mm: f64,
    cutoff_hz: f64,
) -> Result<String, JsValue> {
    to_js(simulate_json(mass, damping, stiffness, altitude_cm, clearance_mm, cutoff_hz))
}

/// Energy fractions for `points` altitudes up to `max_altitude_m`, plus the
/// collision threshold (null when none below the search ceiling).
#[wasm_bindgen]
pub fn energy_curve(
    mass: f64,
    damping: f64,
    stiffness: f64,
    clearance_mm: f64,
    max_altitude_m: f64,
    points: usize,
) -> Result<String, JsValue> {
    to_js(energy_json(mass, damping, stiffness, clearance_mm, max_altitude_m, points))
}

/// Synthesize noisy peaks at 50/100/150 cm with `true_damping`, then fit the
/// damping back; includes the loss curve over the search bracket.
#[wasm_bindgen]
pub fn fit_synthetic(
    mass: f64,
    true_damping: f64,
    stiffness: f64,
    noise: f64,
    repeats: usize,
    seed: u32,
) -> Result<String, JsValue> {
    to_js(fit_json(mass, true_damping, stiffness, noise, repeats, seed as u64))
}
