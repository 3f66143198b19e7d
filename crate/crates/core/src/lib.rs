//! Lumped mass-spring-damper model of a small drone's payload riding on a
//! flexible frame during a vertical crash landing.
//!
//! The crate covers the whole chain used to reason about such impacts:
//!
//! * [`dynamics`]: forward simulation of the contact phase with a fixed-step
//!   RK4 integrator and event termination, plus a closed-form oracle.
//! * [`sensor`]: a first-order Butterworth low-pass standing in for the
//!   accelerometer bandwidth, and filtered peak extraction.
//! * [`energy`]: partition of the drop energy into spring, damper and the
//!   residual rigid-collision share.
//! * [`identify`]: static stiffness regression and damping identification by
//!   minimizing the mean square error against measured peaks.
//! * [`synth`]: seeded synthetic peak datasets for recovery experiments.
//!
//! All quantities are SI. The fitted reference frame (`m = 0.241 kg`,
//! `c = 46 N·s/m`, `k = 7040 N/m`) is available as [`ImpactParams::reference`].
//! The source values for `c` and `k` were published without units; SI is
//! assumed throughout.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod energy;
mod error;
pub mod identify;
pub mod minimize;
mod params;
pub mod sensor;
pub mod synth;

pub use dynamics::{
    analytic_solution, impact_velocity, peak_acceleration, simulate_contact, simulate_from_velocity,
    ContactState,
    Peaks, Sample, Termination, Trajectory,
};
pub use energy::{
    altitude_energy_ratio, collision_threshold_altitude, energy_distribution_curve,
    energy_partition, EnergyBreakdown, EnergyFractions,
};
pub use error::{Error, Result};
pub use identify::{
    estimate_stiffness, fit_damping, model_peak, model_peak_with, mse_loss, FitResult, FixedParams, PeakMode,
    PeakObservation, StaticDeflectionSample,
};
pub use params::{DropScenario, ImpactParams, DEFAULT_GRAVITY, STANDARD_GRAVITY};
pub use synth::{synthesize_peaks, SynthConfig};
pub use sensor::{filtered_peak, filtered_proper_series, lowpass_filter, FilterSpec, SignalTrace};
