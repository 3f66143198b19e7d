//! File formats. CSV files are headered, SI, with units in the column names.

use std::fs;
use std::io::Write;
use std::path::Path;

use crashsim_core::{PeakObservation, StaticDeflectionSample, Trajectory, STANDARD_GRAVITY};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const PEAKS_HEADER_MS2: [&str; 3] = ["altitude_cm", "peak_ms2", "label"];
pub const PEAKS_HEADER_G: [&str; 3] = ["altitude_cm", "peak_g", "label"];
pub const STATICS_HEADER: [&str; 2] = ["force_n", "deflection_m"];
pub const TRAJECTORY_HEADER: [&str; 5] = ["t_s", "x_m", "v_ms", "a_ms2", "a_filtered_ms2"];
pub const ENERGY_HEADER: [&str; 7] = [
    "altitude_m",
    "e_spring_j",
    "e_damper_j",
    "e_collision_j",
    "frac_spring",
    "frac_damper",
    "frac_collision",
];

/// Acceleration unit of the peaks file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum AccelUnit {
    #[default]
    Ms2,
    G,
}

impl AccelUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            AccelUnit::Ms2 => v,
            AccelUnit::G => v * STANDARD_GRAVITY,
        }
    }

    fn in_unit(self, v: f64) -> f64 {
        match self {
            AccelUnit::Ms2 => v,
            AccelUnit::G => v / STANDARD_GRAVITY,
        }
    }
}

/// Write through a sibling temp file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Config(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.serialize(row).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv encoding failed: {e}")))
}

fn parse_error(path: &Path, e: &csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    };
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f))
}

fn check_header(path: &Path, reader: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<Vec<String>> {
    let header = reader.headers().map_err(|e| parse_error(path, &e))?;
    let got: Vec<String> = header.iter().map(str::to_owned).collect();
    if got.len() != expected.len() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}, got {}", expected.join(","), got.join(",")),
        });
    }
    Ok(got)
}

#[derive(Debug, Serialize, Deserialize)]
struct PeakRow {
    altitude_cm: f64,
    peak: f64,
    label: String,
}

pub fn peaks_csv(observations: &[PeakObservation], unit: AccelUnit) -> Result<Vec<u8>> {
    let header = match unit {
        AccelUnit::Ms2 => PEAKS_HEADER_MS2,
        AccelUnit::G => PEAKS_HEADER_G,
    };
    csv_bytes(
        &header,
        observations.iter().map(|o| PeakRow {
            altitude_cm: o.drop_altitude * 100.0,
            peak: unit.in_unit(o.measured_peak),
            label: o.label.clone(),
        }),
    )
}

/// Read a peaks file. The unit comes from the header (`peak_ms2` or `peak_g`).
pub fn read_peaks(path: &Path) -> Result<Vec<PeakObservation>> {
    let mut reader = open_csv(path)?;
    let header = check_header(path, &mut reader, &PEAKS_HEADER_MS2)?;
    let unit = if header == PEAKS_HEADER_MS2 {
        AccelUnit::Ms2
    } else if header == PEAKS_HEADER_G {
        AccelUnit::G
    } else {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "expected header {} or {}, got {}",
                PEAKS_HEADER_MS2.join(","),
                PEAKS_HEADER_G.join(","),
                header.join(",")
            ),
        });
    };
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_error(path, &e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: PeakRow = rec.deserialize(None).map_err(|e| parse_error(path, &e))?;
        let obs = PeakObservation {
            drop_altitude: row.altitude_cm / 100.0,
            measured_peak: unit.to_si(row.peak),
            label: row.label,
        };
        obs.validate().map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        out.push(obs);
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct StaticsRow {
    force_n: f64,
    deflection_m: f64,
}

pub fn statics_csv(samples: &[StaticDeflectionSample]) -> Result<Vec<u8>> {
    csv_bytes(
        &STATICS_HEADER,
        samples.iter().map(|s| StaticsRow {
            force_n: s.force,
            deflection_m: s.deflection,
        }),
    )
}

pub fn read_statics(path: &Path) -> Result<Vec<StaticDeflectionSample>> {
    let mut reader = open_csv(path)?;
    let header = check_header(path, &mut reader, &STATICS_HEADER)?;
    if header != STATICS_HEADER {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}, got {}", STATICS_HEADER.join(","), header.join(",")),
        });
    }
    reader
        .deserialize::<StaticsRow>()
        .map(|r| {
            r.map(|row| StaticDeflectionSample {
                force: row.force_n,
                deflection: row.deflection_m,
            })
            .map_err(|e| parse_error(path, &e))
        })
        .collect()
}

pub fn trajectory_csv(traj: &Trajectory, filtered: &[f64]) -> Result<Vec<u8>> {
    csv_bytes(
        &TRAJECTORY_HEADER,
        traj.samples
            .iter()
            .zip(filtered)
            .map(|(s, &af)| (s.t, s.x, s.v, s.a, af)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub altitude_m: f64,
    pub e_spring_j: f64,
    pub e_damper_j: f64,
    pub e_collision_j: f64,
    pub frac_spring: f64,
    pub frac_damper: f64,
    pub frac_collision: f64,
}

pub fn energy_csv(rows: &[EnergyRow]) -> Result<Vec<u8>> {
    csv_bytes(&ENERGY_HEADER, rows.iter())
}

pub fn read_energy(path: &Path) -> Result<Vec<EnergyRow>> {
    let mut reader = open_csv(path)?;
    reader
        .deserialize::<EnergyRow>()
        .map(|r| r.map_err(|e| parse_error(path, &e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn malformed_peak_row_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "peaks.csv", "altitude_cm,peak_ms2,label\n50,600,a\n100,oops,b\n150,900,c\n");
        let err = read_peaks(&p).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn nonpositive_peak_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "peaks.csv", "altitude_cm,peak_ms2,label\n50,-1,a\n");
        assert!(matches!(read_peaks(&p).unwrap_err(), CliError::Parse { line: 2, .. }));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "peaks.csv", "alt,peak,label\n50,1,a\n");
        assert!(matches!(read_peaks(&p).unwrap_err(), CliError::Parse { line: 1, .. }));
        let s = write_tmp(&dir, "statics.csv", "f,x\n1,0.001\n");
        assert!(read_statics(&s).is_err());
    }

    #[test]
    fn g_unit_peaks_are_converted() {
        let obs = vec![PeakObservation {
            drop_altitude: 0.5,
            measured_peak: 2.0 * STANDARD_GRAVITY,
            label: "x".into(),
        }];
        let bytes = peaks_csv(&obs, AccelUnit::G).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("altitude_cm,peak_g,label\n50.0,2.0,x"), "{text}");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        fs::write(&p, bytes).unwrap();
        let back = read_peaks(&p).unwrap();
        assert!((back[0].measured_peak - obs[0].measured_peak).abs() < 1e-12);
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"{}").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"{}");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn peaks_round_trip(rows in prop::collection::vec((1e-3f64..1e4, 1e-3f64..1e5, "[a-z0-9-]{1,12}"), 1..20)) {
            let obs: Vec<PeakObservation> = rows.iter().map(|(cm, peak, label)| PeakObservation {
                drop_altitude: cm / 100.0,
                measured_peak: *peak,
                label: label.clone(),
            }).collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("p.csv");
            fs::write(&p, peaks_csv(&obs, AccelUnit::Ms2).unwrap()).unwrap();
            let back = read_peaks(&p).unwrap();
            prop_assert_eq!(back.len(), obs.len());
            for (a, b) in back.iter().zip(&obs) {
                prop_assert!((a.drop_altitude - b.drop_altitude).abs() <= 1e-12 * b.drop_altitude);
                prop_assert_eq!(a.measured_peak, b.measured_peak);
                prop_assert_eq!(&a.label, &b.label);
            }
        }

        #[test]
        fn statics_round_trip(rows in prop::collection::vec((0.0f64..1e4, 0.0f64..1.0), 1..20)) {
            let samples: Vec<_> = rows.iter().map(|&(force, deflection)| StaticDeflectionSample { force, deflection }).collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("s.csv");
            fs::write(&p, statics_csv(&samples).unwrap()).unwrap();
            prop_assert_eq!(read_statics(&p).unwrap(), samples);
        }
    }
}
