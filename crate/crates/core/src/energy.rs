//! Where the energy of a drop goes.
//!
//! During contact the kinetic energy at impact plus the work gravity does over
//! the compression stroke is shared between the spring, the damper and, when
//! the stroke runs out, a residual rigid collision between payload and ground.
//!
//! * No collision: the split is read at maximum compression. The spring term
//!   is the peak stored energy, all of which is handed back by lift-off.
//! * Collision at `x = clearance`: spring is `½·k·clearance²`, collision is the
//!   kinetic energy left at that instant and the damper takes the remainder.
//!
//! The simpler difference rule `damper = KE_impact − spring − collision`
//! ignores gravity work over the stroke (about `m·g·0.016 ≈ 0.04 J` for the
//! reference frame). Both are reported; the primary `damper` field closes the
//! balance exactly.

use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate_contact, Sample, Termination, Trajectory, DEFAULT_MAX_TIME};
use crate::error::{Error, Result};
use crate::params::{DropScenario, ImpactParams};

/// Highest altitude probed by [`collision_threshold_altitude`], m.
pub const THRESHOLD_SEARCH_CEILING: f64 = 100.0;

/// Bisection tolerance of [`collision_threshold_altitude`], m.
pub const THRESHOLD_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyFractions {
    pub spring: f64,
    pub damper: f64,
    pub collision: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DamperRules {
    /// Includes gravity work over the stroke; equals `EnergyBreakdown::damper`.
    pub closed_rule: f64,
    /// Initial kinetic energy minus spring and collision terms.
    pub residual_rule: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub drop_altitude: f64,
    /// `m·g·h`, J.
    pub initial_potential: f64,
    pub kinetic_at_impact: f64,
    pub spring: f64,
    pub damper: f64,
    pub collision: f64,
    /// `m·g·x` at the point the split is read.
    pub gravity_work: f64,
    /// Compression at which the split is read, m.
    pub compression: f64,
    pub termination: Termination,
    pub damper_rules: DamperRules,
    /// Terms divided by `initial_potential` (all 0 when it is 0).
    pub fractions: EnergyFractions,
}

impl EnergyBreakdown {
    fn zero(drop_altitude: f64, termination: Termination) -> Self {
        Self {
            drop_altitude,
            initial_potential: 0.0,
            kinetic_at_impact: 0.0,
            spring: 0.0,
            damper: 0.0,
            collision: 0.0,
            gravity_work: 0.0,
            compression: 0.0,
            termination,
            damper_rules: DamperRules::default(),
            fractions: EnergyFractions::default(),
        }
    }

    /// Share of the initial energy absorbed by the frame (spring + damper).
    pub fn absorbed_fraction(&self) -> f64 {
        self.fractions.spring + self.fractions.damper
    }
}

/// Compression and dissipated energy at maximum compression, refined inside
/// the bracketing interval by cubic Hermite fits through both end samples.
fn max_compression_point(traj: &Trajectory, damping: f64) -> (f64, f64) {
    let s = &traj.samples;
    let turn = s.windows(2).position(|w| w[0].v > 0.0 && w[1].v <= 0.0);
    let Some(i) = turn else {
        // No turning point recorded; use the deepest sample.
        let deepest = s
            .iter()
            .copied()
            .fold(s[0], |best, p| if p.x > best.x { p } else { best });
        return (deepest.x, deepest.damper_energy);
    };
    let (p0, p1) = (s[i], s[i + 1]);
    let frac = hermite_turning_point(&p0, &p1);
    let dt = p1.t - p0.t;
    let (h00, h10, h01, h11) = hermite_basis(frac);
    let x = h00 * p0.x + h10 * dt * p0.v + h01 * p1.x + h11 * dt * p1.v;
    // Dissipated energy has rate c·v², so it gets the same Hermite treatment.
    let e = h00 * p0.damper_energy
        + h10 * dt * damping * p0.v * p0.v
        + h01 * p1.damper_energy
        + h11 * dt * damping * p1.v * p1.v;
    (x.max(p0.x).max(p1.x), e)
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

/// Root in [0, 1] of the derivative of the Hermite interpolant.
fn hermite_turning_point(p0: &Sample, p1: &Sample) -> f64 {
    let dt = p1.t - p0.t;
    let (x0, x1, d0, d1) = (p0.x, p1.x, dt * p0.v, dt * p1.v);
    let qa = 6.0 * x0 + 3.0 * d0 - 6.0 * x1 + 3.0 * d1;
    let qb = -6.0 * x0 - 4.0 * d0 + 6.0 * x1 - 2.0 * d1;
    let qc = d0;
    let linear = d0 / (d0 - d1);
    if qa.abs() < 1e-14 * (qb.abs() + qc.abs()) {
        return (-qc / qb).clamp(0.0, 1.0);
    }
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
    roots
        .into_iter()
        .filter(|r| (0.0..=1.0).contains(r))
        .min_by(|a, b| (a - linear).abs().total_cmp(&(b - linear).abs()))
        .unwrap_or(linear)
}

pub fn breakdown_from_trajectory(
    params: &ImpactParams,
    scenario: &DropScenario,
    traj: &Trajectory,
) -> Result<EnergyBreakdown> {
    let h = scenario.drop_altitude;
    if traj.impact_velocity == 0.0 || traj.is_empty() {
        return Ok(EnergyBreakdown::zero(h, traj.termination));
    }
    let m = params.mass;
    let k = params.stiffness;
    let g = params.gravity;
    let v0 = traj.impact_velocity;
    let kinetic_at_impact = 0.5 * m * v0 * v0;
    let initial_potential = m * g * h;

    let (compression, spring, damper, collision);
    match traj.termination {
        Termination::Collision => {
            let end = traj.last().expect("non-empty trajectory");
            compression = scenario.clearance;
            spring = 0.5 * k * compression * compression;
            collision = 0.5 * m * end.v * end.v;
            damper = if params.damping == 0.0 {
                0.0
            } else {
                kinetic_at_impact + m * g * compression - spring - collision
            };
        }
        Termination::Rebound | Termination::MaxTimeReached => {
            let (x_max, e_damper) = max_compression_point(traj, params.damping);
            compression = x_max;
            spring = 0.5 * k * x_max * x_max;
            collision = 0.0;
            damper = e_damper;
        }
    }
    let gravity_work = m * g * compression;
    let residual_rule = kinetic_at_impact - spring - collision;
    let frac = |e: f64| {
        if initial_potential > 0.0 {
            e / initial_potential
        } else {
            0.0
        }
    };

    Ok(EnergyBreakdown {
        drop_altitude: h,
        initial_potential,
        kinetic_at_impact,
        spring,
        damper: damper.max(0.0),
        collision,
        gravity_work,
        compression,
        termination: traj.termination,
        damper_rules: DamperRules {
            closed_rule: damper.max(0.0),
            residual_rule,
        },
        fractions: EnergyFractions {
            spring: frac(spring),
            damper: frac(damper.max(0.0)),
            collision: frac(collision),
        },
    })
}

pub fn energy_partition(params: &ImpactParams, scenario: &DropScenario) -> Result<EnergyBreakdown> {
    let traj = simulate_contact(params, scenario, DEFAULT_MAX_TIME)?;
    breakdown_from_trajectory(params, scenario, &traj)
}

/// [`energy_partition`] over a list of altitudes, in input order.
pub fn energy_distribution_curve(
    params: &ImpactParams,
    scenario_template: &DropScenario,
    altitudes: &[f64],
) -> Result<Vec<(f64, EnergyBreakdown)>> {
    if altitudes.is_empty() {
        return Err(Error::Domain("altitude list is empty".into()));
    }
    let one = |&h: &f64| -> Result<(f64, EnergyBreakdown)> {
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("altitude must be finite and >= 0, got {h}")).at_altitude(h));
        }
        energy_partition(params, &scenario_template.at_altitude(h))
            .map(|b| (h, b))
            .map_err(|e| e.at_altitude(h))
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        altitudes.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        altitudes.iter().map(one).collect()
    }
}

fn collides(params: &ImpactParams, template: &DropScenario, h: f64) -> Result<bool> {
    let traj = simulate_contact(params, &template.at_altitude(h), DEFAULT_MAX_TIME)?;
    Ok(traj.termination == Termination::Collision)
}

/// Smallest drop altitude whose contact ends in a rigid collision, to within
/// [`THRESHOLD_TOLERANCE`]. Returns `f64::INFINITY` when even
/// [`THRESHOLD_SEARCH_CEILING`] does not collide.
pub fn collision_threshold_altitude(
    params: &ImpactParams,
    scenario_template: &DropScenario,
) -> Result<f64> {
    params.validate()?;
    scenario_template.at_altitude(0.0).validate()?;
    if !collides(params, scenario_template, THRESHOLD_SEARCH_CEILING)? {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, THRESHOLD_SEARCH_CEILING);
    while hi - lo > THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if collides(params, scenario_template, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Ratio of the impact energies `m1·g·h1 / (m2·g·h2)` of two drop tests.
pub fn altitude_energy_ratio(m1: f64, h1: f64, m2: f64, h2: f64) -> Result<f64> {
    for (name, v) in [("m1", m1), ("h1", h1), ("m2", m2), ("h2", h2)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    Ok((m1 * h1) / (m2 * h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_from_velocity;
    use approx::assert_relative_eq;

    #[test]
    fn undamped_exchange_is_complete() {
        let p = ImpactParams::with_gravity(1.0, 0.0, 1.0, 0.0).unwrap();
        let scenario = DropScenario {
            drop_altitude: 0.0,
            clearance: 10.0,
            sensor_cutoff: 500.0,
            sample_rate: 20_000.0,
        };
        let traj = simulate_from_velocity(&p, &scenario, 1.0, 10.0).unwrap();
        let b = breakdown_from_trajectory(&p, &scenario, &traj).unwrap();
        assert_eq!(b.damper, 0.0);
        assert_relative_eq!(b.spring, b.kinetic_at_impact, max_relative = 1e-9);
        assert_relative_eq!(b.compression, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn undamped_with_gravity_stores_weight_work() {
        let p = ImpactParams::reference().with_damping(0.0);
        let scenario = DropScenario {
            clearance: 1.0,
            ..DropScenario::from_altitude(0.2)
        };
        let b = energy_partition(&p, &scenario).unwrap();
        assert_eq!(b.damper, 0.0);
        assert_relative_eq!(b.spring, b.kinetic_at_impact + b.gravity_work, max_relative = 1e-8);
    }

    #[test]
    fn zero_altitude_is_all_zero() {
        let b = energy_partition(&ImpactParams::reference(), &DropScenario::from_altitude(0.0)).unwrap();
        assert_eq!(b.spring + b.damper + b.collision + b.initial_potential, 0.0);
        assert_eq!(b.fractions, EnergyFractions::default());
    }

    #[test]
    fn no_collision_at_one_metre() {
        let b = energy_partition(&ImpactParams::reference(), &DropScenario::from_altitude(1.0)).unwrap();
        assert_eq!(b.termination, Termination::Rebound);
        assert_eq!(b.collision, 0.0);
        // At maximum compression the split closes on KE + gravity work.
        assert_relative_eq!(b.spring + b.damper, b.kinetic_at_impact + b.gravity_work, max_relative = 1e-6);
    }

    #[test]
    fn twenty_metres_keeps_thirty_percent() {
        let b = energy_partition(&ImpactParams::reference(), &DropScenario::from_altitude(20.0)).unwrap();
        assert_eq!(b.termination, Termination::Collision);
        assert!(b.absorbed_fraction() > 0.30, "absorbed {}", b.absorbed_fraction());
        assert_relative_eq!(
            b.spring + b.damper + b.collision,
            b.kinetic_at_impact + b.gravity_work,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            b.damper_rules.closed_rule - b.damper_rules.residual_rule,
            b.gravity_work,
            max_relative = 1e-9
        );
    }

    #[test]
    fn collision_share_grows_with_altitude() {
        let curve = energy_distribution_curve(
            &ImpactParams::reference(),
            &DropScenario::default(),
            &[5.0, 10.0, 20.0],
        )
        .unwrap();
        let shares: Vec<f64> = curve.iter().map(|(_, b)| b.fractions.collision).collect();
        assert!(shares.windows(2).all(|w| w[1] > w[0]), "{shares:?}");
        assert_eq!(curve.iter().map(|(h, _)| *h).collect::<Vec<_>>(), vec![5.0, 10.0, 20.0]);
    }

    #[test]
    fn curve_reports_bad_altitude() {
        let err = energy_distribution_curve(
            &ImpactParams::reference(),
            &DropScenario::default(),
            &[1.0, -2.0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::AtAltitude { altitude, .. } if altitude == -2.0));
        assert!(energy_distribution_curve(&ImpactParams::reference(), &DropScenario::default(), &[]).is_err());
    }

    #[test]
    fn huge_clearance_never_collides() {
        let scenario = DropScenario {
            clearance: 1.0,
            ..DropScenario::default()
        };
        let h = collision_threshold_altitude(&ImpactParams::reference(), &scenario).unwrap();
        assert_eq!(h, f64::INFINITY);
    }

    #[test]
    fn energy_ratio() {
        let r = altitude_energy_ratio(0.241, 1.5, 0.239, 0.3).unwrap();
        assert!((r - 5.04).abs() < 0.01, "r = {r}");
        assert_eq!(altitude_energy_ratio(0.3, 0.7, 0.3, 0.7).unwrap(), 1.0);
        assert_eq!(altitude_energy_ratio(1.0, 2.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(altitude_energy_ratio(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(altitude_energy_ratio(1.0, 1.0, 1.0, -1.0).is_err());
    }
}
