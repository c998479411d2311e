//! Output serialization: CSV files with bit-exact float round-tripping and a
//! JSON summary sidecar per run.
//!
//! All numbers are written with 17 significant digits, so re-parsing a CSV
//! reproduces the original f64 values exactly. CSV bodies contain no
//! timestamps; identical runs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::EvolutionRecord;
use crate::error::{Error, Result};
use crate::experiments::{
    DynamicsSummary, MixingEntry, RobustnessReport, SpectrumSummary, ZeroModeSummary,
};
use crate::scattering::{InvariantChecks, Spectrum};

pub const SPECTRUM_HEADER: &str = "delta_omega_over_delta0,T2,R2,reT,imT,reR,imR";
pub const SNAPSHOTS_HEADER: &str = "t,z,re_psi1,im_psi1,re_psi2,im_psi2";
pub const OBSERVABLES_HEADER: &str = "t,norm2,mean_z,rms_width,overlap0";
pub const ENSEMBLE_HEADER: &str = "seed,peak_freq_over_delta0,peak_T2,phi,oracle_T2,oracle_dev";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn write_atomically(path: &Path, body: &str) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(body.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

/// Each value with 17 significant digits (round-trip exact for f64).
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Spectrum CSV. Refuses to write a spectrum that violates flux unitarity:
/// a diagnostic error is preferable to silently bad data.
pub fn write_spectrum_csv(spectrum: &Spectrum, path: &Path) -> Result<()> {
    if spectrum.checks.max_flux_deviation > crate::experiments::FLUX_TOLERANCE {
        return Err(Error::Invariant(format!(
            "refusing to write spectrum: flux deviation {:.3e} exceeds {:.0e}",
            spectrum.checks.max_flux_deviation,
            crate::experiments::FLUX_TOLERANCE,
        )));
    }
    let mut body = String::with_capacity(spectrum.points.len() * 160 + 64);
    body.push_str(SPECTRUM_HEADER);
    body.push('\n');
    for p in &spectrum.points {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(p.delta_omega / spectrum.delta0),
            fmt(p.t2),
            fmt(p.r2),
            fmt(p.t_re),
            fmt(p.t_im),
            fmt(p.r_re),
            fmt(p.r_im),
        ));
    }
    write_atomically(path, &body)
}

/// Snapshot CSV: one row per (snapshot, cell).
pub fn write_snapshots_csv(record: &EvolutionRecord, path: &Path) -> Result<()> {
    let mut body = String::new();
    body.push_str(SNAPSHOTS_HEADER);
    body.push('\n');
    for (t, field) in &record.snapshots {
        let grid = field.grid();
        for (i, z) in grid.midpoints().enumerate() {
            let p1 = field.psi1()[i];
            let p2 = field.psi2()[i];
            body.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt(*t),
                fmt(z),
                fmt(p1.re),
                fmt(p1.im),
                fmt(p2.re),
                fmt(p2.im),
            ));
        }
    }
    write_atomically(path, &body)
}

/// Observables CSV: one row per snapshot.
pub fn write_observables_csv(record: &EvolutionRecord, path: &Path) -> Result<()> {
    let mut body = String::new();
    body.push_str(OBSERVABLES_HEADER);
    body.push('\n');
    for o in &record.observables {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(o.t),
            fmt(o.norm_sq),
            fmt(o.mean_z),
            fmt(o.rms_width),
            fmt(o.overlap_initial),
        ));
    }
    write_atomically(path, &body)
}

/// Per-seed ensemble CSV.
pub fn write_ensemble_csv(report: &RobustnessReport, path: &Path) -> Result<()> {
    let mut body = String::new();
    body.push_str(ENSEMBLE_HEADER);
    body.push('\n');
    for s in &report.per_seed {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.seed,
            fmt(s.peak_freq),
            fmt(s.peak_t2),
            fmt(s.phi),
            fmt(s.oracle_t2),
            fmt(s.oracle_deviation),
        ));
    }
    write_atomically(path, &body)
}

/// Provenance block embedded in every summary sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub tool_version: String,
    /// RFC 3339; None in deterministic test contexts.
    pub timestamp: Option<String>,
    /// The fully resolved configuration, in the config file format.
    pub resolved_config: String,
    pub grid_cells: usize,
    pub seeds: Vec<u64>,
    pub invariants: InvariantChecks,
}

/// Mixing-sweep entry without its spectrum payload.
#[derive(Clone, Debug, Serialize)]
pub struct MixingSummaryRow {
    pub f: f64,
    pub midgap_peak_freq: f64,
    pub midgap_peak_t2: f64,
    pub gap_depth_t2: f64,
}

impl From<&MixingEntry> for MixingSummaryRow {
    fn from(e: &MixingEntry) -> Self {
        MixingSummaryRow {
            f: e.f,
            midgap_peak_freq: e.midgap_peak_freq,
            midgap_peak_t2: e.midgap_peak_t2,
            gap_depth_t2: e.gap_depth_t2,
        }
    }
}

/// The JSON document written next to the data files.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub scenario: Option<String>,
    pub metadata: RunMetadata,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_mode: Option<ZeroModeSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ensembles: Vec<RobustnessReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mixing_sweep: Vec<MixingSummaryRow>,
}

pub fn write_summary_json(summary: &RunSummary, path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Invariant(format!("summary serialization failed: {e}")))?;
    write_atomically(path, &format!("{body}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;
    use crate::experiments::{build_setup, run_scenario};
    use crate::scattering::{spectrum, sweep_frequencies, ScatterMode};

    fn small_spectrum() -> Spectrum {
        let mut c = ScenarioConfig::default();
        c.sweep_count = 41;
        let setup = build_setup(&c).unwrap();
        let freqs = sweep_frequencies(c.sweep_min, c.sweep_max, c.sweep_count, setup.delta0).unwrap();
        spectrum(&setup.sampled, &freqs, setup.delta0, &setup.scale, &setup.mixing, ScatterMode::Ideal)
            .unwrap()
    }

    #[test]
    fn spectrum_csv_has_header_plus_rows() {
        let spec = small_spectrum();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spectrum.csv");
        write_spectrum_csv(&spec, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 42);
        assert_eq!(lines[0], SPECTRUM_HEADER);
    }

    #[test]
    fn spectrum_csv_round_trips_flux_unitarity() {
        let spec = small_spectrum();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spectrum.csv");
        write_spectrum_csv(&spec, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for line in text.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            let (t2, r2) = (cols[1], cols[2]);
            assert!((t2 + r2 - 1.0).abs() < 1e-10);
            // amplitude columns reproduce the intensities
            assert!((cols[3] * cols[3] + cols[4] * cols[4] - t2).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_floats_round_trip_exactly() {
        let spec = small_spectrum();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spectrum.csv");
        write_spectrum_csv(&spec, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for (line, p) in text.lines().skip(1).zip(&spec.points) {
            let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(cols[1], p.t2);
            assert_eq!(cols[3], p.t_re);
            assert_eq!(cols[6], p.r_im);
        }
    }

    #[test]
    fn corrupt_spectrum_refused() {
        let mut spec = small_spectrum();
        spec.checks.max_flux_deviation = 1.0;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        assert!(matches!(write_spectrum_csv(&spec, &path), Err(Error::Invariant(_))));
        assert!(!path.exists() || std::fs::read_to_string(&path).unwrap().is_empty());
    }

    #[test]
    fn snapshot_row_count_is_snapshots_times_cells() {
        let mut c = crate::experiments::ScenarioName::Fig3Trapped.preset();
        c.evolve_steps = 100;
        c.evolve_stride = 50;
        c.grid_cells = 200;
        let r = run_scenario(&c).unwrap();
        let record = r.evolution.unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshots.csv");
        write_snapshots_csv(&record, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let n_lines = text.lines().count();
        assert_eq!(n_lines, 1 + record.snapshots.len() * 200);
    }

    #[test]
    fn identical_runs_produce_byte_identical_csv() {
        let spec_a = small_spectrum();
        let spec_b = small_spectrum();
        let dir = tempfile::tempdir().unwrap();
        let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        write_spectrum_csv(&spec_a, &pa).unwrap();
        write_spectrum_csv(&spec_b, &pb).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    }
}
