//! Contact-phase dynamics.
//!
//! `x` is the downward compression of the payload measured from the instant
//! the frame first touches the ground, so positive `x` loads the spring and
//! the forcing is the payload weight:
//!
//! ```text
//! m·ẍ = m·g − c·ẋ − k·x,    x(0) = 0,  ẋ(0) = sqrt(2·g·h)
//! ```
//!
//! The linear model only holds until the payload has used up the available
//! clearance, so a simulation ends at the first of rigid collision
//! (`x = clearance`), lift-off (`x` back to 0) or the time limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DropScenario, ImpactParams};

/// Hard cap on the integration step, s.
pub const MAX_STEP: f64 = 1e-4;

/// Time limit used by the higher-level analyses, s. A contact event for any
/// realistic frame lasts a few tens of milliseconds.
pub const DEFAULT_MAX_TIME: f64 = 0.5;

/// Free-fall speed at first ground contact.
pub fn impact_velocity(drop_altitude: f64, gravity: f64) -> Result<f64> {
    if !(drop_altitude >= 0.0) || !drop_altitude.is_finite() {
        return Err(Error::Domain(format!(
            "drop altitude must be finite and >= 0, got {drop_altitude}"
        )));
    }
    if !(gravity >= 0.0) || !gravity.is_finite() {
        return Err(Error::Domain(format!(
            "gravity must be finite and >= 0, got {gravity}"
        )));
    }
    Ok((2.0 * gravity * drop_altitude).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Compression returned to zero: the frame lifted off the ground.
    Rebound,
    /// Compression reached the clearance: payload meets the ground rigidly.
    Collision,
    MaxTimeReached,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Rebound => "Rebound",
            Termination::Collision => "Collision",
            Termination::MaxTimeReached => "MaxTimeReached",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub a: f64,
    /// Energy dissipated by the damper so far, `∫ c·ẋ² dt`, integrated
    /// alongside the state.
    pub damper_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub impact_velocity: f64,
    /// Spacing of the regular samples. An event sample, when present, is the
    /// last one and sits between two grid points.
    pub sample_rate: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Largest compression over the recorded samples.
    pub fn max_compression(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.x)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct State {
    x: f64,
    v: f64,
    e: f64,
}

impl State {
    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite() && self.e.is_finite()
    }

    fn lerp(&self, other: &State, f: f64) -> State {
        State {
            x: self.x + f * (other.x - self.x),
            v: self.v + f * (other.v - self.v),
            e: self.e + f * (other.e - self.e),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Plant {
    inv_mass: f64,
    damping: f64,
    stiffness: f64,
    gravity: f64,
}

impl Plant {
    fn new(p: &ImpactParams) -> Self {
        Self {
            inv_mass: 1.0 / p.mass,
            damping: p.damping,
            stiffness: p.stiffness,
            gravity: p.gravity,
        }
    }

    fn accel(&self, x: f64, v: f64) -> f64 {
        self.gravity - (self.damping * v + self.stiffness * x) * self.inv_mass
    }

    fn deriv(&self, s: &State) -> State {
        State {
            x: s.v,
            v: self.accel(s.x, s.v),
            e: self.damping * s.v * s.v,
        }
    }

    fn rk4(&self, s: &State, h: f64) -> State {
        let add = |a: &State, d: &State, w: f64| State {
            x: a.x + w * d.x,
            v: a.v + w * d.v,
            e: a.e + w * d.e,
        };
        let k1 = self.deriv(s);
        let k2 = self.deriv(&add(s, &k1, 0.5 * h));
        let k3 = self.deriv(&add(s, &k2, 0.5 * h));
        let k4 = self.deriv(&add(s, &k3, h));
        State {
            x: s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            v: s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            e: s.e + h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e),
        }
    }

    /// Time into the step `start -> end` (length `h`) at which `x` reaches
    /// `target`. Linear interpolation gives the first guess, which Newton
    /// iterations on a partial RK4 step then refine.
    fn locate_crossing(&self, start: &State, end: &State, guess: f64, h: f64, target: f64) -> (f64, State) {
        let mut tau = guess;
        let mut hit = self.rk4(start, tau);
        let scale = start.x.abs().max(end.x.abs()).max(target.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..8 {
            let miss = hit.x - target;
            if miss.abs() <= 4.0 * f64::EPSILON * scale || hit.v == 0.0 {
                break;
            }
            let next_tau = (tau - miss / hit.v).clamp(0.0, h);
            if next_tau == tau {
                break;
            }
            tau = next_tau;
            hit = self.rk4(start, tau);
        }
        if !hit.is_finite() || tau <= 0.0 {
            let f = guess / h;
            return (guess, start.lerp(end, f));
        }
        (tau, hit)
    }

    fn sample(&self, t: f64, s: &State) -> Sample {
        Sample {
            t,
            x: s.x,
            v: s.v,
            a: self.accel(s.x, s.v),
            damper_energy: s.e,
        }
    }
}

/// Integrate the contact phase of a drop.
///
/// Samples are recorded at `scenario.sample_rate`; when that spacing exceeds
/// [`MAX_STEP`] each sample interval is split into equal RK4 substeps.
/// A termination event is bracketed by the substep in which `x` crosses the
/// boundary; its time is estimated by linear interpolation, then polished by
/// Newton iteration on a partial RK4 step so the final sample lies on the
/// integrated solution.
///
/// A zero impact velocity means the payload is already resting on the ground:
/// the result is a single sample at rest, terminated as `Rebound`.
pub fn simulate_contact(
    params: &ImpactParams,
    scenario: &DropScenario,
    max_time: f64,
) -> Result<Trajectory> {
    params.validate()?;
    scenario.validate()?;
    let v0 = impact_velocity(scenario.drop_altitude, params.gravity)?;
    simulate_from_velocity(params, scenario, v0, max_time)
}

/// Same as [`simulate_contact`] but with the contact speed given directly;
/// `scenario.drop_altitude` is ignored. Needed when `g = 0`, where no drop
/// height produces a nonzero impact speed.
pub fn simulate_from_velocity(
    params: &ImpactParams,
    scenario: &DropScenario,
    v0: f64,
    max_time: f64,
) -> Result<Trajectory> {
    params.validate()?;
    scenario.validate()?;
    if !(v0 >= 0.0) || !v0.is_finite() {
        return Err(Error::Domain(format!(
            "impact velocity must be finite and >= 0, got {v0}"
        )));
    }
    if !(max_time > 0.0) || !max_time.is_finite() {
        return Err(Error::Config(format!(
            "max_time must be finite and > 0, got {max_time}"
        )));
    }

    let plant = Plant::new(params);
    let dt = 1.0 / scenario.sample_rate;
    let substeps = (dt / MAX_STEP * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;
    let n_samples = (max_time / dt).ceil() as usize;

    if v0 == 0.0 {
        return Ok(Trajectory {
            samples: vec![Sample {
                t: 0.0,
                x: 0.0,
                v: 0.0,
                a: 0.0,
                damper_energy: 0.0,
            }],
            termination: Termination::Rebound,
            impact_velocity: 0.0,
            sample_rate: scenario.sample_rate,
        });
    }

    let clearance = scenario.clearance;
    let mut state = State { x: 0.0, v: v0, e: 0.0 };
    let mut samples = Vec::with_capacity(n_samples.min(1 << 16) + 2);
    samples.push(plant.sample(0.0, &state));

    for i in 0..n_samples {
        let t_grid = i as f64 * dt;
        for j in 0..substeps {
            let t0 = t_grid + j as f64 * h;
            let next = plant.rk4(&state, h);
            if !next.is_finite() {
                return Err(Error::NonFinite { time: t0 + h });
            }

            let event = if state.x < clearance && next.x >= clearance {
                let f = (clearance - state.x) / (next.x - state.x);
                Some((Termination::Collision, f))
            } else if state.x > 0.0 && next.x <= 0.0 {
                let f = state.x / (state.x - next.x);
                Some((Termination::Rebound, f))
            } else {
                None
            };

            if let Some((termination, f)) = event {
                let target = match termination {
                    Termination::Collision => clearance,
                    _ => 0.0,
                };
                let (tau, mut hit) = plant.locate_crossing(&state, &next, f * h, h, target);
                // Pin the crossing coordinate exactly.
                hit.x = target;
                samples.push(plant.sample(t0 + tau, &hit));
                return Ok(Trajectory {
                    samples,
                    termination,
                    impact_velocity: v0,
                    sample_rate: scenario.sample_rate,
                });
            }
            state = next;
        }
        samples.push(plant.sample((i + 1) as f64 * dt, &state));
    }

    Ok(Trajectory {
        samples,
        termination: Termination::MaxTimeReached,
        impact_velocity: v0,
        sample_rate: scenario.sample_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    pub x: f64,
    pub v: f64,
    pub a: f64,
}

/// Closed-form solution of `m·ẍ + c·ẋ + k·x = m·g` with `x(0) = 0`,
/// `ẋ(0) = impact_velocity`, valid for the underdamped regime `ζ < 1`.
pub fn analytic_solution(
    params: &ImpactParams,
    impact_velocity: f64,
    t: f64,
) -> Result<ContactState> {
    params.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let zeta = params.damping_ratio();
    if zeta >= 1.0 {
        return Err(Error::UnsupportedRegime { zeta });
    }

    let wn = params.natural_frequency();
    let sigma = zeta * wn;
    let wd = wn * (1.0 - zeta * zeta).sqrt();
    let x_eq = params.static_deflection();

    // x = x_eq + e^(−σt)·(A·cos ω_d t + B·sin ω_d t)
    let a0 = -x_eq;
    let b0 = (impact_velocity + sigma * a0) / wd;
    // Each derivative maps (A, B) -> (−σA + ω_d B, −σB − ω_d A).
    let a1 = -sigma * a0 + wd * b0;
    let b1 = -sigma * b0 - wd * a0;
    let a2 = -sigma * a1 + wd * b1;
    let b2 = -sigma * b1 - wd * a1;

    let decay = (-sigma * t).exp();
    let (s, c) = (wd * t).sin_cos();
    Ok(ContactState {
        x: x_eq + decay * (a0 * c + b0 * s),
        v: decay * (a1 * c + b1 * s),
        a: decay * (a2 * c + b2 * s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peaks {
    /// `max |a(t)|`, the kinematic deceleration.
    pub raw_peak: f64,
    /// `max |a(t) − g|`, what an accelerometer registers (specific force).
    pub proper_peak: f64,
}

pub fn peak_acceleration(traj: &Trajectory, gravity: f64) -> Result<Peaks> {
    if traj.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let (raw_peak, proper_peak) = traj.samples.iter().fold((0.0_f64, 0.0_f64), |(r, p), s| {
        (r.max(s.a.abs()), p.max((s.a - gravity).abs()))
    });
    Ok(Peaks {
        raw_peak,
        proper_peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn unit_oscillator() -> ImpactParams {
        ImpactParams::with_gravity(1.0, 0.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn impact_velocity_values() {
        assert_eq!(impact_velocity(0.0, 9.81).unwrap(), 0.0);
        let v = impact_velocity(2.62, 9.81).unwrap();
        assert!((v - 7.17).abs() < 0.01, "v = {v}");
        // 2·9.81·1.5 = 29.43, sqrt = 5.424942396...
        assert_relative_eq!(impact_velocity(1.5, 9.81).unwrap(), 5.424_942_396_007_538, max_relative = 1e-14);
        assert!(impact_velocity(-1.0, 9.81).is_err());
        assert!(impact_velocity(1.0, -9.81).is_err());
    }

    #[test]
    fn undamped_oscillator_rebounds_at_half_period() {
        let p = unit_oscillator();
        let scenario = DropScenario {
            drop_altitude: 0.0,
            clearance: 10.0,
            sensor_cutoff: 500.0,
            sample_rate: 20_000.0,
        };
        let traj = simulate_from_velocity(&p, &scenario, 1.0, 10.0).unwrap();
        assert_eq!(traj.termination, Termination::Rebound);
        assert_relative_eq!(traj.max_compression(), 1.0, epsilon = 1e-8);
        let end = traj.last().unwrap();
        assert_relative_eq!(end.t, std::f64::consts::PI, epsilon = 1e-7);
        assert_relative_eq!(end.v, -1.0, epsilon = 1e-6);
        for s in &traj.samples {
            assert_relative_eq!(0.5 * s.v * s.v + 0.5 * s.x * s.x, 0.5, epsilon = 1e-9);
            assert_eq!(s.damper_energy, 0.0);
        }

        let s = analytic_solution(&p, 1.0, FRAC_PI_2).unwrap();
        assert_relative_eq!(s.x, 1.0, epsilon = 1e-15);
        assert!(s.v.abs() < 1e-15);
        assert_relative_eq!(s.a, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_altitude_is_rest() {
        let traj = simulate_contact(
            &ImpactParams::reference(),
            &DropScenario::from_altitude(0.0),
            DEFAULT_MAX_TIME,
        )
        .unwrap();
        assert_eq!(traj.len(), 1);
        let peaks = peak_acceleration(&traj, 9.81).unwrap();
        assert_eq!(peaks.raw_peak, 0.0);
        assert_eq!(peaks.proper_peak, 9.81);
    }

    #[test]
    fn reference_frame_regimes() {
        let p = ImpactParams::reference();
        for h in [0.5, 1.0] {
            let traj = simulate_contact(&p, &DropScenario::from_altitude(h), DEFAULT_MAX_TIME).unwrap();
            assert_eq!(traj.termination, Termination::Rebound, "h = {h}");
        }
        let traj = simulate_contact(&p, &DropScenario::from_altitude(20.0), DEFAULT_MAX_TIME).unwrap();
        assert_eq!(traj.termination, Termination::Collision);
        assert_eq!(traj.last().unwrap().x, 0.016);
    }

    #[test]
    fn trajectory_invariants() {
        let p = ImpactParams::reference();
        for h in [0.3, 1.0, 5.0] {
            let traj = simulate_contact(&p, &DropScenario::from_altitude(h), DEFAULT_MAX_TIME).unwrap();
            let first = traj.samples[0];
            assert_eq!(first.t, 0.0);
            assert_eq!(first.x, 0.0);
            assert_eq!(first.v, traj.impact_velocity);
            assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
            let interior = &traj.samples[1..traj.len() - 1];
            assert!(interior.iter().all(|s| s.x > 0.0 && s.x < 0.016));
        }
    }

    #[test]
    fn short_time_limit_stops_on_grid() {
        let p = ImpactParams::reference();
        let traj = simulate_contact(&p, &DropScenario::from_altitude(1.0), 1e-3).unwrap();
        assert_eq!(traj.termination, Termination::MaxTimeReached);
        assert_eq!(traj.len(), 21);
        assert_relative_eq!(traj.last().unwrap().t, 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn coarse_sample_rate_is_substepped() {
        let p = ImpactParams::reference();
        let fine = DropScenario {
            sample_rate: 10_000.0,
            ..DropScenario::from_altitude(1.0)
        };
        let coarse = DropScenario {
            sample_rate: 1_250.0,
            ..fine
        };
        let a = simulate_contact(&p, &fine, DEFAULT_MAX_TIME).unwrap();
        let b = simulate_contact(&p, &coarse, DEFAULT_MAX_TIME).unwrap();
        // Sample k of the coarse run is sample 8k of the fine run.
        for (k, s) in b.samples.iter().enumerate().take(b.len() - 1) {
            let f = a.samples[8 * k];
            assert_relative_eq!(s.t, f.t, max_relative = 1e-12);
            assert_relative_eq!(s.x, f.x, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_rejects_overdamped() {
        let p = ImpactParams::reference().with_damping(200.0);
        assert!(matches!(
            analytic_solution(&p, 1.0, 0.0),
            Err(Error::UnsupportedRegime { .. })
        ));
    }

    #[test]
    fn analytic_initial_conditions() {
        let p = ImpactParams::reference();
        let v0 = impact_velocity(0.5, p.gravity).unwrap();
        let s = analytic_solution(&p, v0, 0.0).unwrap();
        assert!(s.x.abs() < 1e-18);
        assert_relative_eq!(s.v, v0, max_relative = 1e-15);
        // a(0) from the ODE: g − c·v0/m.
        assert_relative_eq!(s.a, p.gravity - p.damping * v0 / p.mass, max_relative = 1e-12);
    }

    #[test]
    fn empty_trajectory_has_no_peak() {
        let traj = Trajectory {
            samples: vec![],
            termination: Termination::MaxTimeReached,
            impact_velocity: 0.0,
            sample_rate: 1.0,
        };
        assert!(peak_acceleration(&traj, 9.81).is_err());
    }

    #[test]
    fn free_fall_reads_zero() {
        let samples = (0..10)
            .map(|i| Sample {
                t: i as f64 * 1e-3,
                x: 0.0,
                v: 0.0,
                a: 9.81,
                damper_energy: 0.0,
            })
            .collect();
        let traj = Trajectory {
            samples,
            termination: Termination::MaxTimeReached,
            impact_velocity: 0.0,
            sample_rate: 1000.0,
        };
        let peaks = peak_acceleration(&traj, 9.81).unwrap();
        assert_eq!(peaks.proper_peak, 0.0);
        assert_eq!(peaks.raw_peak, 9.81);
    }
}
