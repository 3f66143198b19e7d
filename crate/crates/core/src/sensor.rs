//! Accelerometer bandwidth model.
//!
//! The sensor is a first-order Butterworth low-pass `H(s) = ω_c / (s + ω_c)`
//! realized with the bilinear transform, pre-warped so the discrete filter
//! sits exactly at −3 dB at the cutoff.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub cutoff: f64,
    pub sample_rate: f64,
}

impl FilterSpec {
    pub fn new(cutoff: f64, sample_rate: f64) -> Result<Self> {
        let spec = Self {
            cutoff,
            sample_rate,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::Config(format!(
                "filter cutoff must be finite and > 0, got {}",
                self.cutoff
            )));
        }
        if !self.sample_rate.is_finite() || self.sample_rate <= 2.0 * self.cutoff {
            return Err(Error::Config(format!(
                "cutoff {} Hz is not below the Nyquist frequency of {} Hz sampling",
                self.cutoff, self.sample_rate
            )));
        }
        Ok(())
    }

    /// Smoothing gain `α = K / (1 + K)`, `K = tan(π·fc/fs)`.
    fn gain(&self) -> f64 {
        let k = (std::f64::consts::PI * self.cutoff / self.sample_rate).tan();
        k / (1.0 + k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    pub sample_rate: f64,
    pub values: Vec<f64>,
}

impl SignalTrace {
    pub fn new(sample_rate: f64, values: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::Config(format!(
                "sample rate must be finite and > 0, got {sample_rate}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite signal value at index {i}")));
        }
        Ok(Self {
            sample_rate,
            values,
        })
    }
}

fn rates_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Run the values through the filter. The state is warm-started at the first
/// value, so a constant input comes out unchanged.
fn filter_values(values: &[f64], alpha: f64) -> Vec<f64> {
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let mut prev_in = first;
    let mut prev_out = first;
    values
        .iter()
        .map(|&u| {
            // y[n] = y[n−1] + α·(u[n] + u[n−1] − 2·y[n−1]); algebraically the
            // bilinear recurrence, written so that DC passes bit-exactly.
            let y = prev_out + alpha * ((u - prev_out) + (prev_in - prev_out));
            prev_in = u;
            prev_out = y;
            y
        })
        .collect()
}

pub fn lowpass_filter(trace: &SignalTrace, spec: &FilterSpec) -> Result<SignalTrace> {
    spec.validate()?;
    if !rates_match(trace.sample_rate, spec.sample_rate) {
        return Err(Error::Config(format!(
            "trace sampled at {} Hz but filter designed for {} Hz",
            trace.sample_rate, spec.sample_rate
        )));
    }
    if trace.values.is_empty() {
        return Err(Error::Domain("cannot filter an empty trace".into()));
    }
    Ok(SignalTrace {
        sample_rate: trace.sample_rate,
        values: filter_values(&trace.values, spec.gain()),
    })
}

/// Filtered proper-acceleration magnitude `|a − g|` for every trajectory
/// sample, as the sensor would report it.
///
/// A trajectory that starts with a nonzero impact speed was preceded by free
/// fall, during which the sensor reads 0; the filter is warm-started on that
/// reading rather than on the first contact sample. The final sample of an
/// event-terminated trajectory is treated as one more regular step.
pub fn filtered_proper_series(
    traj: &Trajectory,
    spec: &FilterSpec,
    gravity: f64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if !rates_match(traj.sample_rate, spec.sample_rate) {
        return Err(Error::Config(format!(
            "trajectory sampled at {} Hz but filter designed for {} Hz",
            traj.sample_rate, spec.sample_rate
        )));
    }
    if traj.is_empty() {
        return Err(Error::Domain("cannot filter an empty trajectory".into()));
    }
    let free_fall = traj.impact_velocity > 0.0;
    let mut proper = Vec::with_capacity(traj.len() + 1);
    if free_fall {
        proper.push(0.0);
    }
    proper.extend(traj.samples.iter().map(|s| (s.a - gravity).abs()));
    let mut out = filter_values(&proper, spec.gain());
    if free_fall {
        out.remove(0);
    }
    Ok(out)
}

/// Peak of the sensor-filtered proper acceleration, the quantity compared
/// against measured drop-test peaks.
pub fn filtered_peak(traj: &Trajectory, spec: &FilterSpec, gravity: f64) -> Result<f64> {
    let series = filtered_proper_series(traj, spec, gravity)?;
    Ok(series.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}
