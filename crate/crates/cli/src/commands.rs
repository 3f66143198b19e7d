use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use crashsim_core::dynamics::DEFAULT_MAX_TIME;
use crashsim_core::energy::THRESHOLD_SEARCH_CEILING;
use crashsim_core::sensor::filtered_proper_series;
use crashsim_core::{
    collision_threshold_altitude, energy_distribution_curve, estimate_stiffness, fit_damping,
    peak_acceleration, simulate_contact, synthesize_peaks, DropScenario, EnergyBreakdown,
    FilterSpec, FixedParams, ImpactParams, PeakMode, SynthConfig, DEFAULT_GRAVITY,
    STANDARD_GRAVITY,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::formats::{self, AccelUnit, EnergyRow};

#[derive(Debug, Parser)]
#[command(name = "crashsim", version, about = "Crash-landing impact model: simulate, fit, analyze")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Directory receiving all output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Seed for synthetic noise.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Acceleration unit of peaks files written by `synth`.
    #[arg(long, global = true, value_enum, default_value_t = AccelUnit::Ms2)]
    pub unit: AccelUnit,
}

impl Default for GlobalOpts {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            seed: 0,
            unit: AccelUnit::Ms2,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one drop; writes trajectory.csv and simulate.json.
    Simulate(SimulateArgs),
    /// Identify damping (and optionally stiffness); writes fit.json.
    Fit(FitArgs),
    /// Energy partition over altitudes; writes energy.csv and energy.json.
    Energy(EnergyArgs),
    /// Generate a synthetic peaks dataset; writes peaks.csv.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Payload mass, kg.
    #[arg(long, default_value_t = 0.241)]
    pub mass: f64,
    /// Equivalent damping, N·s/m.
    #[arg(long, default_value_t = 46.0)]
    pub damping: f64,
    /// Equivalent stiffness, N/m.
    #[arg(long, default_value_t = 7040.0)]
    pub stiffness: f64,
    /// m/s².
    #[arg(long, default_value_t = DEFAULT_GRAVITY)]
    pub gravity: f64,
}

impl Default for ModelArgs {
    fn default() -> Self {
        Self {
            mass: 0.241,
            damping: 46.0,
            stiffness: 7040.0,
            gravity: DEFAULT_GRAVITY,
        }
    }
}

impl ModelArgs {
    fn params(&self) -> Result<ImpactParams> {
        Ok(ImpactParams::with_gravity(
            self.mass,
            self.damping,
            self.stiffness,
            self.gravity,
        )?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Stroke before rigid payload-ground contact, m.
    #[arg(long, default_value_t = DropScenario::DEFAULT_CLEARANCE)]
    pub clearance_m: f64,
    /// Accelerometer bandwidth, Hz.
    #[arg(long, default_value_t = DropScenario::DEFAULT_SENSOR_CUTOFF)]
    pub cutoff_hz: f64,
    #[arg(long, default_value_t = DropScenario::DEFAULT_SAMPLE_RATE)]
    pub sample_rate_hz: f64,
}

impl Default for ScenarioArgs {
    fn default() -> Self {
        Self {
            clearance_m: DropScenario::DEFAULT_CLEARANCE,
            cutoff_hz: DropScenario::DEFAULT_SENSOR_CUTOFF,
            sample_rate_hz: DropScenario::DEFAULT_SAMPLE_RATE,
        }
    }
}

impl ScenarioArgs {
    fn scenario(&self, altitude_m: f64) -> Result<DropScenario> {
        let s = DropScenario {
            drop_altitude: altitude_m,
            clearance: self.clearance_m,
            sensor_cutoff: self.cutoff_hz,
            sample_rate: self.sample_rate_hz,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum PeakModeArg {
    #[default]
    Filtered,
    Proper,
    Raw,
}

impl From<PeakModeArg> for PeakMode {
    fn from(m: PeakModeArg) -> Self {
        match m {
            PeakModeArg::Filtered => PeakMode::Filtered,
            PeakModeArg::Proper => PeakMode::Proper,
            PeakModeArg::Raw => PeakMode::Raw,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub altitude_cm: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_TIME)]
    pub max_time_s: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Peaks CSV (`altitude_cm,peak_ms2,label`).
    #[arg(long)]
    pub peaks: PathBuf,
    /// Static test CSV (`force_n,deflection_m`); overrides --stiffness.
    #[arg(long)]
    pub statics: Option<PathBuf>,
    /// Stiffness, N/m, when no static data is given.
    #[arg(long)]
    pub stiffness: Option<f64>,
    #[arg(long, default_value_t = 0.241)]
    pub mass: f64,
    #[arg(long, default_value_t = DEFAULT_GRAVITY)]
    pub gravity: f64,
    /// Lower damping bound, N·s/m.
    #[arg(long, default_value_t = 0.0)]
    pub c_low: f64,
    /// Upper damping bound, N·s/m (default 5·c_crit).
    #[arg(long)]
    pub c_high: Option<f64>,
    #[arg(long, value_enum, default_value_t = PeakModeArg::Filtered)]
    pub peak_mode: PeakModeArg,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated altitudes, cm.
    #[arg(long, value_delimiter = ',', conflicts_with = "range_cm")]
    pub altitudes_cm: Vec<f64>,
    /// Altitude range `start:stop:step`, cm, inclusive of stop.
    #[arg(long)]
    pub range_cm: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated altitudes, cm.
    #[arg(long, value_delimiter = ',', default_value = "50,100,150")]
    pub altitudes_cm: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Relative std of multiplicative Gaussian noise on each peak.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise: f64,
    #[arg(long, value_enum, default_value_t = PeakModeArg::Filtered)]
    pub peak_mode: PeakModeArg,
    /// Also write one trajectory CSV per altitude.
    #[arg(long)]
    pub traces: bool,
}

/// Files written by a command, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
    pub report: serde_json::Value,
}

struct Pending {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Pending {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, out_dir: &Path, name: &str, bytes: Vec<u8>) {
        self.files.push((out_dir.join(name), bytes));
    }

    fn add_json(&mut self, out_dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(out_dir, name, bytes);
        Ok(())
    }

    fn commit(self, out_dir: &Path, report: serde_json::Value) -> Result<Outputs> {
        fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        let mut files = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            formats::write_atomic(&path, &bytes)?;
            files.push(path);
        }
        Ok(Outputs { files, report })
    }
}

fn cm_to_m(cm: f64) -> Result<f64> {
    if !cm.is_finite() || cm < 0.0 {
        return Err(CliError::Config(format!("altitude must be finite and >= 0 cm, got {cm}")));
    }
    Ok(cm / 100.0)
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input file does not exist"),
        ));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outputs> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(&cli.global, a),
        Command::Fit(a) => cmd_fit(&cli.global, a),
        Command::Energy(a) => cmd_energy(&cli.global, a),
        Command::Synth(a) => cmd_synth(&cli.global, a),
    }
}

fn simulate_report(params: &ImpactParams, scenario: &DropScenario, max_time: f64) -> Result<(Vec<u8>, serde_json::Value)> {
    let traj = simulate_contact(params, scenario, max_time)?;
    let spec = FilterSpec::new(scenario.sensor_cutoff, scenario.sample_rate)?;
    let filtered = filtered_proper_series(&traj, &spec, params.gravity)?;
    let peaks = peak_acceleration(&traj, params.gravity)?;
    let filtered_peak = filtered.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let summary = json!({
        "impact_velocity": traj.impact_velocity,
        "raw_peak": peaks.raw_peak,
        "proper_peak": peaks.proper_peak,
        "filtered_peak": filtered_peak,
        "termination": traj.termination.as_str(),
        "x_max": traj.max_compression().max(0.0),
        "contact_duration_s": traj.last().map(|s| s.t).unwrap_or(0.0),
        "params": params,
        "scenario": scenario,
    });
    Ok((formats::trajectory_csv(&traj, &filtered)?, summary))
}

pub fn cmd_simulate(global: &GlobalOpts, args: &SimulateArgs) -> Result<Outputs> {
    let params = args.model.params()?;
    let scenario = args.scenario.scenario(cm_to_m(args.altitude_cm)?)?;
    let (csv, summary) = simulate_report(&params, &scenario, args.max_time_s)?;
    let mut pending = Pending::new();
    pending.add(&global.out_dir, "trajectory.csv", csv);
    pending.add_json(&global.out_dir, "simulate.json", &summary)?;
    pending.commit(&global.out_dir, summary)
}

pub fn cmd_fit(global: &GlobalOpts, args: &FitArgs) -> Result<Outputs> {
    require_file(&args.peaks)?;
    if let Some(s) = &args.statics {
        require_file(s)?;
    }
    let (stiffness, source) = match (&args.statics, args.stiffness) {
        (Some(path), _) => (estimate_stiffness(&formats::read_statics(path)?)?, "measured"),
        (None, Some(k)) => (k, "supplied"),
        (None, None) => {
            return Err(CliError::Config(
                "either --statics or --stiffness is required".into(),
            ))
        }
    };
    let observations = formats::read_peaks(&args.peaks)?;
    if observations.is_empty() {
        return Err(crashsim_core::Error::Domain(format!(
            "{}: no observations",
            args.peaks.display()
        ))
        .into());
    }
    let fixed = FixedParams {
        mass: args.mass,
        stiffness,
        gravity: args.gravity,
        scenario: args.scenario.scenario(0.0)?,
        mode: args.peak_mode.into(),
    };
    fixed.params(0.0)?;
    let bracket = (
        args.c_low,
        args.c_high.unwrap_or_else(|| fixed.default_bracket().1),
    );
    let fit = fit_damping(&fixed, &observations, bracket)?;
    let report = json!({
        "damping": fit.damping,
        "loss": fit.loss,
        "loss_g2": fit.loss / (STANDARD_GRAVITY * STANDARD_GRAVITY),
        "evaluations": fit.evaluations,
        "bracket": [fit.bracket.0, fit.bracket.1],
        "at_boundary": fit.at_boundary,
        "stiffness": stiffness,
        "stiffness_source": source,
        "mass": args.mass,
        "gravity": args.gravity,
        "damping_ratio": fit.damping / fixed.critical_damping(),
        "peak_mode": fixed.mode,
        "observations": observations.len(),
    });
    let mut pending = Pending::new();
    pending.add_json(&global.out_dir, "fit.json", &report)?;
    pending.commit(&global.out_dir, report)
}

fn parse_range_cm(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("range must be start:stop:step in cm, got '{spec}'"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

#[derive(Serialize)]
struct EnergyRecord<'a> {
    altitude_m: f64,
    termination: &'a str,
    initial_potential_j: f64,
    kinetic_at_impact_j: f64,
    spring_j: f64,
    collision_j: f64,
    gravity_work_j: f64,
    compression_m: f64,
    damper_j: serde_json::Value,
    fractions: crashsim_core::EnergyFractions,
}

fn energy_record(b: &EnergyBreakdown) -> EnergyRecord<'static> {
    EnergyRecord {
        altitude_m: b.drop_altitude,
        termination: b.termination.as_str(),
        initial_potential_j: b.initial_potential,
        kinetic_at_impact_j: b.kinetic_at_impact,
        spring_j: b.spring,
        collision_j: b.collision,
        gravity_work_j: b.gravity_work,
        compression_m: b.compression,
        damper_j: json!({
            "closed_rule": b.damper_rules.closed_rule,
            "residual_rule": b.damper_rules.residual_rule,
        }),
        fractions: b.fractions,
    }
}

pub fn cmd_energy(global: &GlobalOpts, args: &EnergyArgs) -> Result<Outputs> {
    let params = args.model.params()?;
    let altitudes_cm = match (&args.range_cm, args.altitudes_cm.is_empty()) {
        (Some(r), _) => parse_range_cm(r)?,
        (None, false) => args.altitudes_cm.clone(),
        (None, true) => return Err(CliError::Config("give --altitudes-cm or --range-cm".into())),
    };
    let altitudes: Vec<f64> = altitudes_cm.iter().map(|&cm| cm_to_m(cm)).collect::<Result<_>>()?;
    let template = args.scenario.scenario(0.0)?;
    let curve = energy_distribution_curve(&params, &template, &altitudes)?;
    let threshold = collision_threshold_altitude(&params, &template)?;

    let rows: Vec<EnergyRow> = curve
        .iter()
        .map(|(h, b)| EnergyRow {
            altitude_m: *h,
            e_spring_j: b.spring,
            e_damper_j: b.damper,
            e_collision_j: b.collision,
            frac_spring: b.fractions.spring,
            frac_damper: b.fractions.damper,
            frac_collision: b.fractions.collision,
        })
        .collect();
    let report = json!({
        "params": params,
        "clearance_m": template.clearance,
        "collision_threshold_altitude_m": if threshold.is_finite() { json!(threshold) } else { json!(null) },
        "collision_below_search_ceiling": threshold.is_finite(),
        "search_ceiling_m": THRESHOLD_SEARCH_CEILING,
        "records": curve.iter().map(|(_, b)| energy_record(b)).collect::<Vec<_>>(),
    });
    let mut pending = Pending::new();
    pending.add(&global.out_dir, "energy.csv", formats::energy_csv(&rows)?);
    pending.add_json(&global.out_dir, "energy.json", &report)?;
    pending.commit(&global.out_dir, report)
}

pub fn cmd_synth(global: &GlobalOpts, args: &SynthArgs) -> Result<Outputs> {
    if !(args.noise >= 0.0) {
        return Err(CliError::Config(format!("noise must be >= 0, got {}", args.noise)));
    }
    if args.repeats == 0 {
        return Err(CliError::Config("repeats must be >= 1".into()));
    }
    let params = args.model.params()?;
    let template = args.scenario.scenario(0.0)?;
    let altitudes: Vec<f64> = args
        .altitudes_cm
        .iter()
        .map(|&cm| cm_to_m(cm))
        .collect::<Result<_>>()?;
    let config = SynthConfig {
        altitudes: altitudes.clone(),
        repeats: args.repeats,
        noise: args.noise,
        seed: global.seed,
        mode: args.peak_mode.into(),
    };
    let observations = synthesize_peaks(&params, &template, &config)?;

    let mut pending = Pending::new();
    pending.add(&global.out_dir, "peaks.csv", formats::peaks_csv(&observations, global.unit)?);
    if args.traces {
        for &h in &altitudes {
            let (csv, _) = simulate_report(&params, &template.at_altitude(h), DEFAULT_MAX_TIME)?;
            pending.add(&global.out_dir, &format!("trace_{:.0}cm.csv", h * 100.0), csv);
        }
    }
    let report = json!({
        "rows": observations.len(),
        "seed": global.seed,
        "noise": args.noise,
        "params": params,
    });
    pending.commit(&global.out_dir, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range_cm("50:150:50").unwrap(), vec![50.0, 100.0, 150.0]);
        assert_eq!(parse_range_cm("0:0.3:0.1").unwrap().len(), 4);
        assert!(parse_range_cm("1:0:1").is_err());
        assert!(parse_range_cm("1:2").is_err());
        assert!(parse_range_cm("0:10:0").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_altitude_rejected() {
        assert!(cm_to_m(-1.0).is_err());
    }
}
