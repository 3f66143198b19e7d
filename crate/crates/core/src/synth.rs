//! Seeded synthetic drop-test datasets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::identify::{model_peak_with, PeakMode, PeakObservation};
use crate::params::{DropScenario, ImpactParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub altitudes: Vec<f64>,
    pub repeats: usize,
    /// Relative standard deviation of the multiplicative Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    pub mode: PeakMode,
}

/// One observation per altitude and repeat, altitude-major. Each peak is the
/// model peak times `1 + noise·N(0, 1)`; the model is evaluated once per
/// altitude.
pub fn synthesize_peaks(
    params: &ImpactParams,
    scenario_template: &DropScenario,
    config: &SynthConfig,
) -> Result<Vec<PeakObservation>> {
    if !(config.noise >= 0.0) || !config.noise.is_finite() {
        return Err(Error::Config(format!(
            "noise level must be finite and >= 0, got {}",
            config.noise
        )));
    }
    if config.repeats == 0 {
        return Err(Error::Config("repeat count must be >= 1".into()));
    }
    if config.altitudes.is_empty() {
        return Err(Error::Config("no altitudes given".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.altitudes.len() * config.repeats);
    for &h in &config.altitudes {
        if !(h > 0.0) {
            return Err(Error::Config(format!("synthetic drop altitude must be > 0, got {h}")));
        }
        let peak = model_peak_with(params, &scenario_template.at_altitude(h), config.mode)
            .map_err(|e| e.at_altitude(h))?;
        for r in 0..config.repeats {
            let z: f64 = StandardNormal.sample(&mut rng);
            let factor = (1.0 + config.noise * z).max(f64::MIN_POSITIVE);
            out.push(PeakObservation {
                drop_altitude: h,
                measured_peak: peak * factor,
                label: format!("synth-{:.0}cm-{}", h * 100.0, r + 1),
            });
        }
    }
    Ok(out)
}
