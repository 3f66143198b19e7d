//! Integrator against the closed-form solution, energy bookkeeping and event
//! placement.

use crashsim_core::dynamics::{simulate_from_velocity, DEFAULT_MAX_TIME};
use crashsim_core::{
    analytic_solution, impact_velocity, peak_acceleration, simulate_contact, DropScenario,
    ImpactParams, Termination, Trajectory,
};

fn fine_scenario(h: f64) -> DropScenario {
    DropScenario {
        sample_rate: 100_000.0,
        ..DropScenario::from_altitude(h)
    }
}

/// Max of |numeric − analytic| over samples, relative to the largest
/// analytic magnitude of the same component.
fn relative_state_error(p: &ImpactParams, traj: &Trajectory) -> (f64, f64) {
    let mut ex: f64 = 0.0;
    let mut ev: f64 = 0.0;
    let mut sx: f64 = 0.0;
    let mut sv: f64 = 0.0;
    for s in &traj.samples {
        let exact = analytic_solution(p, traj.impact_velocity, s.t).unwrap();
        ex = ex.max((s.x - exact.x).abs());
        ev = ev.max((s.v - exact.v).abs());
        sx = sx.max(exact.x.abs());
        sv = sv.max(exact.v.abs());
    }
    (ex / sx, ev / sv)
}

#[test]
fn integrator_matches_closed_form_on_grid() {
    let base = ImpactParams::reference();
    for c in [5.0, 20.0, 46.0, 65.0, 80.0] {
        for h in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let p = base.with_damping(c);
            assert!(p.damping_ratio() < 1.0);
            let traj = simulate_contact(&p, &fine_scenario(h), DEFAULT_MAX_TIME).unwrap();
            let (rx, rv) = relative_state_error(&p, &traj);
            assert!(rx < 1e-6 && rv < 1e-6, "c = {c}, h = {h}: rel err x {rx:e}, v {rv:e}");
        }
    }
}

#[test]
fn integrator_matches_closed_form_at_one_khz_grid_points() {
    // Reference frame, 50 cm drop, compared at 1 kHz instants.
    let p = ImpactParams::reference();
    let scenario = DropScenario::from_altitude(0.5);
    let traj = simulate_contact(&p, &scenario, DEFAULT_MAX_TIME).unwrap();
    for s in traj.samples.iter().step_by(20) {
        let exact = analytic_solution(&p, traj.impact_velocity, s.t).unwrap();
        assert!((s.x - exact.x).abs() < 1e-9, "t = {}", s.t);
        assert!((s.v - exact.v).abs() < 1e-7, "t = {}", s.t);
        assert!((s.a - exact.a).abs() < 1e-4, "t = {}", s.t);
    }
}

#[test]
fn analytic_acceleration_satisfies_ode() {
    let p = ImpactParams::reference();
    let v0 = impact_velocity(1.0, p.gravity).unwrap();
    for i in 0..50 {
        let t = i as f64 * 4e-4;
        let s = analytic_solution(&p, v0, t).unwrap();
        let ode = p.gravity - (p.damping * s.v + p.stiffness * s.x) / p.mass;
        assert!((s.a - ode).abs() < 1e-9 * ode.abs().max(1.0));
    }
}

#[test]
fn energy_balance_holds_every_sample() {
    let base = ImpactParams::reference();
    for c in [0.0, 10.0, 46.0, 80.0] {
        for h in [0.3, 1.0, 1.5, 3.0, 20.0] {
            let p = base.with_damping(c);
            let traj = simulate_contact(&p, &DropScenario::from_altitude(h), DEFAULT_MAX_TIME).unwrap();
            let v0 = traj.impact_velocity;
            let e0 = 0.5 * p.mass * v0 * v0;
            for s in &traj.samples {
                let lhs = 0.5 * p.mass * s.v * s.v + 0.5 * p.stiffness * s.x * s.x + s.damper_energy;
                let rhs = e0 + p.mass * p.gravity * s.x;
                assert!(
                    (lhs - rhs).abs() <= 1e-6 * rhs,
                    "c = {c}, h = {h}, t = {}: {lhs} vs {rhs}",
                    s.t
                );
            }
        }
    }
}

#[test]
fn undamped_weightless_motion_is_periodic() {
    let p = ImpactParams::with_gravity(0.241, 0.0, 7040.0, 0.0).unwrap();
    let scenario = DropScenario {
        clearance: 1.0,
        ..DropScenario::default()
    };
    for v0 in [0.5, 3.0, 7.0] {
        let traj = simulate_from_velocity(&p, &scenario, v0, DEFAULT_MAX_TIME).unwrap();
        assert_eq!(traj.termination, Termination::Rebound);
        assert!(traj.samples.iter().all(|s| s.damper_energy == 0.0));
        let end = traj.last().unwrap();
        assert!((end.v + v0).abs() < 1e-6 * v0, "v0 = {v0}: end v {}", end.v);
        let half_period = std::f64::consts::PI / p.natural_frequency();
        assert!((end.t - half_period).abs() < 1e-6 * half_period);
    }
}

/// Largest compression over the first half cycle of the closed form, by
/// dense sampling at 1 µs.
fn analytic_max_compression(p: &ImpactParams, v0: f64) -> f64 {
    let wd = p.natural_frequency() * (1.0 - p.damping_ratio().powi(2)).sqrt();
    let horizon = std::f64::consts::PI / wd;
    let n = (horizon / 1e-6).ceil() as usize;
    (0..=n)
        .map(|i| analytic_solution(p, v0, i as f64 * 1e-6).unwrap().x)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn collision_iff_closed_form_reaches_clearance() {
    let mut checked = 0;
    let mut collisions = 0;
    for c in [10.0, 30.0, 46.0, 70.0] {
        for k in [3000.0, 7040.0, 12000.0] {
            for h in [0.2, 0.6, 1.2, 1.8, 3.0] {
                let p = ImpactParams::new(0.241, c, k).unwrap();
                if p.damping_ratio() >= 1.0 {
                    continue;
                }
                let scenario = DropScenario::from_altitude(h);
                let v0 = impact_velocity(h, p.gravity).unwrap();
                let x_max = analytic_max_compression(&p, v0);
                if (x_max - scenario.clearance).abs() < 1e-7 {
                    continue;
                }
                let traj = simulate_contact(&p, &scenario, DEFAULT_MAX_TIME).unwrap();
                let collided = traj.termination == Termination::Collision;
                assert_eq!(collided, x_max >= scenario.clearance, "c = {c}, k = {k}, h = {h}, x_max = {x_max}");
                checked += 1;
                collisions += collided as usize;
            }
        }
    }
    assert!(checked > 50);
    assert!(collisions > 5 && collisions < checked - 5);
}

#[test]
fn rebound_samples_stay_inside_stroke() {
    let p = ImpactParams::reference();
    let traj = simulate_contact(&p, &DropScenario::from_altitude(1.0), DEFAULT_MAX_TIME).unwrap();
    assert_eq!(traj.termination, Termination::Rebound);
    let end = traj.last().unwrap();
    assert!(end.x <= 0.0);
    let n = traj.len();
    assert!(traj.samples[..n - 1].iter().all(|s| (0.0..=0.016).contains(&s.x)));
}

#[test]
fn peak_at_half_metre_matches_dense_closed_form() {
    let p = ImpactParams::reference();
    let traj = simulate_contact(&p, &DropScenario::from_altitude(0.5), DEFAULT_MAX_TIME).unwrap();
    let peaks = peak_acceleration(&traj, p.gravity).unwrap();

    let v0 = traj.impact_velocity;
    let t_end = traj.last().unwrap().t;
    let n = (t_end / 1e-7) as usize;
    let (mut raw, mut proper) = (0.0_f64, 0.0_f64);
    for i in 0..=n {
        let a = analytic_solution(&p, v0, i as f64 * 1e-7).unwrap().a;
        raw = raw.max(a.abs());
        proper = proper.max((a - p.gravity).abs());
    }
    // Both are attained at first contact, a(0) = g − c·v0/m.
    let at_contact = p.damping * v0 / p.mass;
    assert!((proper - at_contact).abs() < 1e-9 * at_contact);
    assert!((peaks.raw_peak - raw).abs() < 1e-6 * raw, "{} vs {raw}", peaks.raw_peak);
    assert!((peaks.proper_peak - proper).abs() < 1e-6 * proper);
}

#[test]
fn raw_peak_grows_with_altitude() {
    let p = ImpactParams::reference();
    let mut last = 0.0;
    for i in 1..=30 {
        let h = 0.1 * i as f64;
        let traj = simulate_contact(&p, &DropScenario::from_altitude(h), DEFAULT_MAX_TIME).unwrap();
        let raw = peak_acceleration(&traj, p.gravity).unwrap().raw_peak;
        assert!(raw >= last, "h = {h}");
        last = raw;
    }
}

#[test]
fn sweep_is_order_independent() {
    use rayon::prelude::*;
    let p = ImpactParams::reference();
    let hs: Vec<f64> = (1..=24).map(|i| 0.25 * i as f64).collect();
    let serial: Vec<Trajectory> = hs
        .iter()
        .map(|&h| simulate_contact(&p, &DropScenario::from_altitude(h), DEFAULT_MAX_TIME).unwrap())
        .collect();
    let parallel: Vec<Trajectory> = hs
        .par_iter()
        .rev()
        .map(|&h| simulate_contact(&p, &DropScenario::from_altitude(h), DEFAULT_MAX_TIME).unwrap())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    assert_eq!(serial, parallel);
}
