//! Parameter identification from drop-test and static-test data.
//!
//! The mass is weighed and the stiffness comes from a static force/deflection
//! test, which leaves damping as the single free parameter. It is chosen to
//! minimize the mean square error between the model's sensor-filtered peak
//! and every measured peak.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{peak_acceleration, simulate_contact, DEFAULT_MAX_TIME};
use crate::error::{Error, Result};
use crate::minimize::golden_section;
use crate::params::{DropScenario, ImpactParams};
use crate::sensor::{filtered_peak, FilterSpec};

/// Number of points in the coarse damping scan.
pub const GRID_POINTS: usize = 64;

/// Absolute tolerance of the golden-section refinement, N·s/m.
pub const DAMPING_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakObservation {
    /// m.
    pub drop_altitude: f64,
    /// Peak proper-acceleration magnitude, m/s².
    pub measured_peak: f64,
    pub label: String,
}

impl PeakObservation {
    pub fn validate(&self) -> Result<()> {
        if !(self.drop_altitude > 0.0) || !self.drop_altitude.is_finite() {
            return Err(Error::Domain(format!(
                "observation '{}': drop altitude must be > 0, got {}",
                self.label, self.drop_altitude
            )));
        }
        if !(self.measured_peak > 0.0) || !self.measured_peak.is_finite() {
            return Err(Error::Domain(format!(
                "observation '{}': measured peak must be finite and > 0, got {}",
                self.label, self.measured_peak
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticDeflectionSample {
    /// N.
    pub force: f64,
    /// m.
    pub deflection: f64,
}

/// Least-squares slope through the origin, `k = Σ F·x / Σ x²`.
pub fn estimate_stiffness(samples: &[StaticDeflectionSample]) -> Result<f64> {
    for (i, s) in samples.iter().enumerate() {
        if !(s.force >= 0.0) || !(s.deflection >= 0.0) || !s.force.is_finite() || !s.deflection.is_finite() {
            return Err(Error::Domain(format!(
                "static sample {i}: force and deflection must be finite and >= 0, got ({}, {})",
                s.force, s.deflection
            )));
        }
    }
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.deflection).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "need at least 2 distinct deflections, got {}",
            distinct.len()
        )));
    }
    let sxx: f64 = samples.iter().map(|s| s.deflection * s.deflection).sum();
    let sfx: f64 = samples.iter().map(|s| s.force * s.deflection).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all deflections are zero".into()));
    }
    Ok(sfx / sxx)
}

/// Which peak of the simulated contact is compared with measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakMode {
    /// Sensor-filtered `|a − g|`.
    #[default]
    Filtered,
    /// Unfiltered `|a − g|`.
    Proper,
    /// Unfiltered `|a|`.
    Raw,
}

pub fn model_peak(params: &ImpactParams, scenario: &DropScenario) -> Result<f64> {
    model_peak_with(params, scenario, PeakMode::Filtered)
}

pub fn model_peak_with(params: &ImpactParams, scenario: &DropScenario, mode: PeakMode) -> Result<f64> {
    let traj = simulate_contact(params, scenario, DEFAULT_MAX_TIME)?;
    match mode {
        PeakMode::Filtered => {
            let spec = FilterSpec::new(scenario.sensor_cutoff, scenario.sample_rate)?;
            filtered_peak(&traj, &spec, params.gravity)
        }
        PeakMode::Proper => Ok(peak_acceleration(&traj, params.gravity)?.proper_peak),
        PeakMode::Raw => Ok(peak_acceleration(&traj, params.gravity)?.raw_peak),
    }
}

/// Everything held fixed while damping is identified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub mass: f64,
    pub stiffness: f64,
    pub gravity: f64,
    /// Sensor and geometry settings; the altitude is replaced per observation.
    pub scenario: DropScenario,
    pub mode: PeakMode,
}

impl FixedParams {
    pub fn new(mass: f64, stiffness: f64) -> Self {
        Self {
            mass,
            stiffness,
            gravity: crate::params::DEFAULT_GRAVITY,
            scenario: DropScenario::default(),
            mode: PeakMode::Filtered,
        }
    }

    pub fn params(&self, damping: f64) -> Result<ImpactParams> {
        ImpactParams::with_gravity(self.mass, damping, self.stiffness, self.gravity)
    }

    pub fn critical_damping(&self) -> f64 {
        2.0 * (self.stiffness * self.mass).sqrt()
    }

    /// `(0, 5·c_crit]`.
    pub fn default_bracket(&self) -> (f64, f64) {
        (0.0, 5.0 * self.critical_damping())
    }
}

/// Mean square error between model and measured peaks at damping `c`.
/// Model peaks are computed once per distinct altitude.
pub fn mse_loss(c: f64, fixed: &FixedParams, observations: &[PeakObservation]) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::Domain("no observations".into()));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("damping must be finite and >= 0, got {c}")));
    }
    let params = fixed.params(c)?;
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut sum = 0.0;
    for obs in observations {
        obs.validate()?;
        let key = obs.drop_altitude.to_bits();
        let peak = match cache.get(&key) {
            Some(&p) => p,
            None => {
                let p = model_peak_with(&params, &fixed.scenario.at_altitude(obs.drop_altitude), fixed.mode)
                    .map_err(|e| e.at_altitude(obs.drop_altitude))?;
                cache.insert(key, p);
                p
            }
        };
        let r = peak - obs.measured_peak;
        sum += r * r;
    }
    Ok(sum / observations.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// N·s/m.
    pub damping: f64,
    /// MSE at `damping`, (m/s²)².
    pub loss: f64,
    pub evaluations: usize,
    pub bracket: (f64, f64),
    /// The minimizer sits on a bracket edge; the true optimum may lie outside.
    pub at_boundary: bool,
}

/// Grid points `c_low + ε·(span/ε)^(i/(n−1))`, ending exactly at `c_high`.
fn log_grid(c_low: f64, c_high: f64) -> Vec<f64> {
    let span = c_high - c_low;
    let eps = (span * 1e-4).max(1e-9);
    let ratio = span / eps;
    let last = (GRID_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| c_low + eps * ratio.powf(i as f64 / last))
        .collect();
    grid[GRID_POINTS - 1] = c_high;
    grid
}

/// Identify damping: a 64-point log-spaced scan locates the best cell, then
/// golden-section search refines inside it to [`DAMPING_TOLERANCE`].
pub fn fit_damping(
    fixed: &FixedParams,
    observations: &[PeakObservation],
    bracket: (f64, f64),
) -> Result<FitResult> {
    let (c_low, c_high) = bracket;
    if !(c_low >= 0.0) || !(c_high > c_low) || !c_high.is_finite() {
        return Err(Error::Config(format!(
            "damping bracket must satisfy 0 <= low < high, got ({c_low}, {c_high})"
        )));
    }
    if observations.is_empty() {
        return Err(Error::Domain("no observations".into()));
    }
    fixed.params(c_low)?;
    for obs in observations {
        obs.validate()?;
    }
    let loss = |c: f64| mse_loss(c, fixed, observations);

    let grid = log_grid(c_low, c_high);
    let grid_losses: Vec<f64> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            grid.par_iter().map(|&c| loss(c)).collect::<Result<_>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            grid.iter().map(|&c| loss(c)).collect::<Result<_>>()?
        }
    };
    let mut evaluations = grid.len();
    let best = grid_losses
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");

    let left = if best == 0 { c_low } else { grid[best - 1] };
    let right = grid[(best + 1).min(GRID_POINTS - 1)];
    let mut candidates = vec![(grid[best], grid_losses[best])];
    if right - left > DAMPING_TOLERANCE {
        let refined = golden_section(loss, left, right, DAMPING_TOLERANCE)?;
        evaluations += refined.evaluations;
        candidates.push((refined.x, refined.value));
    }
    let low_loss = loss(c_low)?;
    evaluations += 1;
    candidates.push((c_low, low_loss));
    candidates.push((c_high, grid_losses[GRID_POINTS - 1]));

    let (damping, best_loss) = candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("candidates are non-empty");
    let at_boundary =
        (damping - c_low).abs() <= DAMPING_TOLERANCE || (c_high - damping).abs() <= DAMPING_TOLERANCE;

    Ok(FitResult {
        damping,
        loss: best_loss,
        evaluations,
        bracket,
        at_boundary,
    })
}
