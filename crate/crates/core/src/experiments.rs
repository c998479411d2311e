//! Declarative scenario catalog: transmission spectra for the clean, sine,
//! noisy, and mixing-angle-perturbed profiles, wave-packet evolutions, the
//! zero-mode profile, and robustness ensembles/sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitialState, ProfileKind, ScenarioConfig};
use crate::dynamics::{
    evolve, gaussian_spinor, hamiltonian_residual, zero_mode_state, EvolutionConfig,
    EvolutionRecord, CHI_PLUS,
};
use crate::error::{Error, Result};
use crate::model::{Grid, MassProfile, MixingAngle, NoiseSpec, PhysicalScale, SampledProfile};
use crate::scattering::{
    gap_edges, midgap_peak, scatter_at, spectrum, sweep_frequencies, zero_frequency_exponent,
    zero_frequency_transmission, InvariantChecks, ScatterMode, Spectrum,
};

/// Catalog of named experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScenarioName {
    Fig3Trapped,
    Fig3Free,
    Fig4aConstant,
    Fig4bKink,
    Fig5aSine,
    Fig5bNoise30,
    Fig5cDs20,
    Suppl1DsSweep,
    Suppl2NoiseSweep,
    ZeromodeProfile,
}

pub const SCENARIO_NAMES: [(&str, ScenarioName); 10] = [
    ("fig3-trapped", ScenarioName::Fig3Trapped),
    ("fig3-free", ScenarioName::Fig3Free),
    ("fig4a-constant", ScenarioName::Fig4aConstant),
    ("fig4b-kink", ScenarioName::Fig4bKink),
    ("fig5a-sine", ScenarioName::Fig5aSine),
    ("fig5b-noise30", ScenarioName::Fig5bNoise30),
    ("fig5c-dS20", ScenarioName::Fig5cDs20),
    ("suppl1-dS-sweep", ScenarioName::Suppl1DsSweep),
    ("suppl2-noise-sweep", ScenarioName::Suppl2NoiseSweep),
    ("zeromode-profile", ScenarioName::ZeromodeProfile),
];

impl std::str::FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SCENARIO_NAMES
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, v)| *v)
            .ok_or_else(|| {
                let valid: Vec<&str> = SCENARIO_NAMES.iter().map(|(n, _)| *n).collect();
                Error::UnknownScenario(s.to_string(), valid.join(", "))
            })
    }
}

impl std::fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = SCENARIO_NAMES
            .iter()
            .find(|(_, v)| v == self)
            .map(|(n, _)| *n)
            .unwrap();
        f.write_str(name)
    }
}

impl ScenarioName {
    /// Resolved config for this scenario before user overrides.
    pub fn preset(self) -> ScenarioConfig {
        let mut c = ScenarioConfig { scenario: Some(self), ..ScenarioConfig::default() };
        match self {
            ScenarioName::Fig4bKink => {}
            ScenarioName::Fig4aConstant => c.profile_kind = ProfileKind::Constant,
            ScenarioName::Fig5aSine => c.profile_kind = ProfileKind::Sine,
            ScenarioName::Fig5bNoise30 => {
                c.noise_a = 0.3;
                c.noise_seed = 1;
            }
            ScenarioName::Fig5cDs20 => {
                c.mixing_f = 0.2;
                c.mode = ScatterMode::Generalized;
            }
            ScenarioName::Suppl1DsSweep => c.mode = ScatterMode::Generalized,
            ScenarioName::Suppl2NoiseSweep => {}
            // Natural units m = c = κ = 1: v0 = 1, δ0 = 1, λ = 1 on [−20, 20].
            ScenarioName::Fig3Trapped | ScenarioName::ZeromodeProfile => {
                c.v0 = 1.0;
                c.length = 40.0;
                c.grid_cells = 4000;
                c.theta = 40.0;
                c.sharpness = 40.0;
                if self == ScenarioName::ZeromodeProfile {
                    c.initial_state = InitialState::ZeroMode;
                }
            }
            ScenarioName::Fig3Free => {
                c.v0 = 1.0;
                c.length = 40.0;
                c.grid_cells = 4000;
                c.theta = 40.0;
                c.sharpness = 40.0;
                c.profile_kind = ProfileKind::Constant;
            }
        }
        c
    }
}

/// Pieces of the physical setup a config resolves to.
pub struct Setup {
    pub scale: PhysicalScale,
    pub grid: Grid,
    pub profile: MassProfile,
    pub sampled: SampledProfile,
    pub mixing: MixingAngle,
    pub delta0: f64,
}

pub fn build_setup(config: &ScenarioConfig) -> Result<Setup> {
    config.validate()?;
    let scale = PhysicalScale::new(config.v0, config.length)?.with_waveguide_speed(config.c_wg);
    let grid = Grid::new(&scale, config.grid_cells)?;
    let delta0 = config.delta0();
    let base = match config.profile_kind {
        ProfileKind::Kink => MassProfile::kink_dimensionless(config.theta, config.sharpness, &scale),
        ProfileKind::Sine => MassProfile::Sine { delta0, k: config.k },
        ProfileKind::Constant => MassProfile::Constant { delta0 },
    };
    let profile = if config.noise_a > 0.0 {
        base.with_noise(NoiseSpec::new(config.noise_a, config.noise_seed)?)
    } else {
        base
    };
    let sampled = profile.sample(&grid, &scale)?;
    let mixing = MixingAngle::new(config.mixing_f)?;
    Ok(Setup { scale, grid, profile, sampled, mixing, delta0 })
}

/// Summary of one spectrum, as written to the JSON sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub label: String,
    /// Peak of |T|² restricted to |Δω| < δ0/2, frequency in units of δ0.
    pub midgap_peak_freq: f64,
    pub midgap_peak_t2: f64,
    /// Outermost crossings of |T|² = 0.5 in units of δ0, when present.
    pub gap_edge_lo: Option<f64>,
    pub gap_edge_hi: Option<f64>,
    /// Zero-frequency oracle |T|² = sech²Φ and the pipeline deviation from it.
    pub oracle_t2: f64,
    pub oracle_deviation: f64,
    pub checks: InvariantChecks,
}

fn summarize_spectrum(
    label: &str,
    spec: &Spectrum,
    sampled: &SampledProfile,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
) -> Result<SpectrumSummary> {
    let (peak_f, peak_t2) = midgap_peak(spec)?;
    let edges = gap_edges(spec);
    let (_, oracle_t2) = zero_frequency_transmission(sampled, scale, mixing);
    let pipeline_zero = spec
        .points
        .iter()
        .find(|p| p.delta_omega == 0.0)
        .map(|p| p.t2);
    let oracle_deviation = pipeline_zero.map_or(f64::NAN, |t2| (t2 - oracle_t2).abs());
    Ok(SpectrumSummary {
        label: label.to_string(),
        midgap_peak_freq: peak_f / spec.delta0,
        midgap_peak_t2: peak_t2,
        gap_edge_lo: edges.map(|(lo, _)| lo / spec.delta0),
        gap_edge_hi: edges.map(|(_, hi)| hi / spec.delta0),
        oracle_t2,
        oracle_deviation,
        checks: spec.checks,
    })
}

/// Per-seed outcome of a noise-ensemble member.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Mid-gap peak frequency in units of δ0 and its |T|².
    pub peak_freq: f64,
    pub peak_t2: f64,
    /// Realized Φ and the analytic sech²Φ cross-check.
    pub phi: f64,
    pub oracle_t2: f64,
    /// |pipeline − sech²Φ| at Δω = 0.
    pub oracle_deviation: f64,
}

/// Noise-robustness ensemble over seeds 1..=n_seeds.
#[derive(Clone, Debug, Serialize)]
pub struct RobustnessReport {
    pub amplitude: f64,
    pub per_seed: Vec<SeedOutcome>,
    pub mean_peak: f64,
    pub min_peak: f64,
    pub max_peak: f64,
    pub max_oracle_deviation: f64,
}

/// Runs the noisy-kink scenario for seeds 1..=n_seeds at amplitude `a` and
/// reports per-seed and aggregate mid-gap transmission. Members run
/// concurrently; the report is ordered by seed.
pub fn noise_ensemble(config: &ScenarioConfig, a: f64, n_seeds: u32) -> Result<RobustnessReport> {
    let per_seed: Vec<SeedOutcome> = (1..=n_seeds as u64)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&seed| -> Result<SeedOutcome> {
            let mut member = config.clone();
            member.noise_a = a;
            member.noise_seed = seed;
            let setup = build_setup(&member)?;
            let freqs =
                sweep_frequencies(member.sweep_min, member.sweep_max, member.sweep_count, setup.delta0)?;
            let spec = spectrum(&setup.sampled, &freqs, setup.delta0, &setup.scale, &setup.mixing, member.mode)?;
            let (peak_f, peak_t2) = midgap_peak(&spec)?;
            let phi = zero_frequency_exponent(&setup.sampled, &setup.scale, &setup.mixing);
            let (_, oracle_t2) = zero_frequency_transmission(&setup.sampled, &setup.scale, &setup.mixing);
            let zero = spec.points.iter().find(|p| p.delta_omega == 0.0);
            let oracle_deviation = zero.map_or(f64::NAN, |p| (p.t2 - oracle_t2).abs());
            Ok(SeedOutcome {
                seed,
                peak_freq: peak_f / setup.delta0,
                peak_t2,
                phi,
                oracle_t2,
                oracle_deviation,
            })
        })
        .collect::<Result<_>>()?;

    let peaks: Vec<f64> = per_seed.iter().map(|s| s.peak_t2).collect();
    let mean = peaks.iter().sum::<f64>() / peaks.len() as f64;
    Ok(RobustnessReport {
        amplitude: a,
        mean_peak: mean,
        min_peak: peaks.iter().cloned().fold(f64::INFINITY, f64::min),
        max_peak: peaks.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        max_oracle_deviation: per_seed
            .iter()
            .map(|s| s.oracle_deviation)
            .fold(0.0, f64::max),
        per_seed,
    })
}

/// One entry of a mixing-angle sweep.
#[derive(Clone, Debug, Serialize)]
pub struct MixingEntry {
    pub f: f64,
    pub midgap_peak_freq: f64,
    pub midgap_peak_t2: f64,
    /// |T|² at Δω = ±δ0/2 (the deeper of the two): in-gap suppression.
    pub gap_depth_t2: f64,
    #[serde(skip)]
    pub spectrum: Spectrum,
}

/// Generalized-mode spectra for each mixing fraction, with mid-gap peak and
/// gap depth per entry.
pub fn mixing_angle_sweep(config: &ScenarioConfig, fractions: &[f64]) -> Result<Vec<MixingEntry>> {
    fractions
        .iter()
        .map(|&f| {
            let mut member = config.clone();
            member.mixing_f = f;
            member.mode = ScatterMode::Generalized;
            let setup = build_setup(&member)?;
            let freqs = sweep_frequencies(
                member.sweep_min,
                member.sweep_max,
                member.sweep_count,
                setup.delta0,
            )?;
            let spec = spectrum(
                &setup.sampled,
                &freqs,
                setup.delta0,
                &setup.scale,
                &setup.mixing,
                ScatterMode::Generalized,
            )?;
            let (peak_f, peak_t2) = midgap_peak(&spec)?;
            // |T|² at the sweep points nearest ±δ0/2 (the larger of the two).
            let half = 0.5 * setup.delta0;
            let nearest = |target: f64| {
                spec.points
                    .iter()
                    .min_by(|a, b| {
                        (a.delta_omega - target)
                            .abs()
                            .total_cmp(&(b.delta_omega - target).abs())
                    })
                    .map(|p| p.t2)
                    .unwrap_or(f64::NAN)
            };
            let depth = nearest(half).max(nearest(-half));
            Ok(MixingEntry {
                f,
                midgap_peak_freq: peak_f / setup.delta0,
                midgap_peak_t2: peak_t2,
                gap_depth_t2: depth,
                spectrum: spec,
            })
        })
        .collect()
}

/// Summary of a dynamics run.
#[derive(Clone, Debug, Serialize)]
pub struct DynamicsSummary {
    pub dt: f64,
    pub final_time: f64,
    pub final_norm_sq: f64,
    pub final_overlap_initial: f64,
    pub initial_rms_width: f64,
    pub final_rms_width: f64,
    pub max_norm_drift: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroModeSummary {
    pub normalizable: bool,
    pub hamiltonian_residual: f64,
    /// Envelope exponent ν = Θ/Λ for the analytic kink.
    pub nu: f64,
}

/// Everything a scenario run can produce.
#[derive(Default)]
pub struct ScenarioResult {
    /// Labeled spectra ("spectrum" for single-spectrum scenarios).
    pub spectra: Vec<(String, Spectrum)>,
    pub spectrum_summaries: Vec<SpectrumSummary>,
    pub evolution: Option<EvolutionRecord>,
    pub dynamics_summary: Option<DynamicsSummary>,
    pub zero_mode_summary: Option<ZeroModeSummary>,
    pub ensembles: Vec<RobustnessReport>,
    pub mixing_entries: Vec<MixingEntry>,
}

/// Mixing fractions probed by `suppl1-dS-sweep`.
pub const SUPPL1_FRACTIONS: [f64; 4] = [0.1, 0.3, 0.4, 0.5];
/// Noise amplitudes probed by `suppl2-noise-sweep`.
pub const SUPPL2_AMPLITUDES: [f64; 4] = [0.05, 0.2, 0.4, 0.5];

/// Run one catalog scenario (or a bare spectrum when no scenario is named).
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    match config.scenario {
        None
        | Some(ScenarioName::Fig4aConstant)
        | Some(ScenarioName::Fig4bKink)
        | Some(ScenarioName::Fig5aSine)
        | Some(ScenarioName::Fig5bNoise30)
        | Some(ScenarioName::Fig5cDs20) => run_spectrum_scenario(config),
        Some(ScenarioName::Suppl1DsSweep) => run_suppl1(config),
        Some(ScenarioName::Suppl2NoiseSweep) => run_suppl2(config),
        Some(ScenarioName::Fig3Trapped) | Some(ScenarioName::Fig3Free) => run_dynamics(config),
        Some(ScenarioName::ZeromodeProfile) => run_zero_mode(config),
    }
}

fn run_spectrum_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let setup = build_setup(config)?;
    let freqs =
        sweep_frequencies(config.sweep_min, config.sweep_max, config.sweep_count, setup.delta0)?;
    let spec = spectrum(&setup.sampled, &freqs, setup.delta0, &setup.scale, &setup.mixing, config.mode)?;
    let summary = summarize_spectrum("spectrum", &spec, &setup.sampled, &setup.scale, &setup.mixing)?;
    Ok(ScenarioResult {
        spectra: vec![("spectrum".into(), spec)],
        spectrum_summaries: vec![summary],
        ..Default::default()
    })
}

fn run_suppl1(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let entries = mixing_angle_sweep(config, &SUPPL1_FRACTIONS)?;
    let mut result = ScenarioResult::default();
    for e in &entries {
        let label = format!("ds{:03}", (e.f * 100.0).round() as u32);
        result.spectra.push((label, e.spectrum.clone()));
    }
    result.mixing_entries = entries;
    Ok(result)
}

fn run_suppl2(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let mut result = ScenarioResult::default();
    for &a in &SUPPL2_AMPLITUDES {
        result.ensembles.push(noise_ensemble(config, a, config.ensemble_count)?);
        // one representative spectrum per amplitude at the golden seed
        let mut member = config.clone();
        member.noise_a = a;
        member.noise_seed = 1;
        let setup = build_setup(&member)?;
        let freqs =
            sweep_frequencies(member.sweep_min, member.sweep_max, member.sweep_count, setup.delta0)?;
        let spec = spectrum(&setup.sampled, &freqs, setup.delta0, &setup.scale, &setup.mixing, member.mode)?;
        let label = format!("noise{:03}", (a * 100.0).round() as u32);
        let summary = summarize_spectrum(&label, &spec, &setup.sampled, &setup.scale, &setup.mixing)?;
        result.spectra.push((label, spec));
        result.spectrum_summaries.push(summary);
    }
    Ok(result)
}

fn run_dynamics(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let setup = build_setup(config)?;
    let initial = match config.initial_state {
        InitialState::Gaussian => {
            gaussian_spinor(&setup.grid, config.evolve_sigma, config.evolve_center, CHI_PLUS)?
        }
        InitialState::ZeroMode => zero_mode_state(&setup.sampled, &setup.scale)?.field,
    };
    let record = evolve(
        &initial,
        &setup.sampled,
        &setup.scale,
        &EvolutionConfig { n_steps: config.evolve_steps, snapshot_stride: config.evolve_stride },
    )?;
    let dt = setup.grid.dz() / setup.scale.v0;
    let first = record.observables.first().unwrap();
    let last = record.observables.last().unwrap();
    let max_drift = record
        .observables
        .iter()
        .map(|o| (o.norm_sq - 1.0).abs())
        .fold(0.0, f64::max);
    let summary = DynamicsSummary {
        dt,
        final_time: last.t,
        final_norm_sq: last.norm_sq,
        final_overlap_initial: last.overlap_initial,
        initial_rms_width: first.rms_width,
        final_rms_width: last.rms_width,
        max_norm_drift: max_drift,
        warnings: record.warnings.clone(),
    };
    Ok(ScenarioResult {
        evolution: Some(record),
        dynamics_summary: Some(summary),
        ..Default::default()
    })
}

fn run_zero_mode(config: &ScenarioConfig) -> Result<ScenarioResult> {
    let setup = build_setup(config)?;
    let zm = zero_mode_state(&setup.sampled, &setup.scale)?;
    let residual = hamiltonian_residual(&zm.field, &setup.sampled, &setup.scale);
    let record = EvolutionRecord {
        snapshots: vec![(0.0, zm.field.clone())],
        observables: vec![crate::dynamics::Observables {
            t: 0.0,
            norm_sq: zm.field.norm_sq(),
            mean_z: zm.field.mean_position(),
            rms_width: zm.field.rms_width(),
            overlap_initial: 1.0,
        }],
        warnings: if zm.normalizable {
            vec![]
        } else {
            vec!["profile has no normalizable zero mode (integral never changes sign)".into()]
        },
    };
    Ok(ScenarioResult {
        evolution: Some(record),
        zero_mode_summary: Some(ZeroModeSummary {
            normalizable: zm.normalizable,
            hamiltonian_residual: residual,
            nu: config.theta / config.sharpness,
        }),
        ..Default::default()
    })
}

/// Flux-unitarity bound every emitted spectrum must satisfy.
pub const FLUX_TOLERANCE: f64 = 1e-10;

/// The deviation of generalized-mode transmission from the ideal-mode one at
/// the same frequencies: the slow-light correction at f = 0.
pub fn ideal_generalized_deviation(config: &ScenarioConfig) -> Result<f64> {
    let setup = build_setup(config)?;
    let freqs =
        sweep_frequencies(config.sweep_min, config.sweep_max, config.sweep_count, setup.delta0)?;
    let mixing = MixingAngle::ideal();
    let dev = freqs
        .par_iter()
        .map(|&fq| -> Result<f64> {
            let (a, _) = scatter_at(&setup.sampled, fq, &setup.scale, &mixing, ScatterMode::Ideal)?;
            let (b, _) =
                scatter_at(&setup.sampled, fq, &setup.scale, &mixing, ScatterMode::Generalized)?;
            Ok((a.t2 - b.t2).abs())
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))?;
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_round_trip() {
        for (name, value) in SCENARIO_NAMES {
            let parsed: ScenarioName = name.parse().unwrap();
            assert_eq!(parsed, value);
            assert_eq!(parsed.to_string(), name);
        }
        assert!(matches!(
            "fig9-nope".parse::<ScenarioName>(),
            Err(Error::UnknownScenario(..))
        ));
    }

    #[test]
    fn fig4b_peak_is_unity_at_zero() {
        let c = ScenarioName::Fig4bKink.preset();
        let r = run_scenario(&c).unwrap();
        let s = &r.spectrum_summaries[0];
        assert_eq!(s.midgap_peak_freq, 0.0);
        assert!((s.midgap_peak_t2 - 1.0).abs() < 1e-10);
        assert!(s.checks.max_flux_deviation < FLUX_TOLERANCE);
    }

    #[test]
    fn fig5a_matches_fig4b_at_zero_frequency() {
        let kink = run_scenario(&ScenarioName::Fig4bKink.preset()).unwrap();
        let sine = run_scenario(&ScenarioName::Fig5aSine.preset()).unwrap();
        let a = kink.spectrum_summaries[0].midgap_peak_t2;
        let b = sine.spectrum_summaries[0].midgap_peak_t2;
        assert!((a - b).abs() < 1e-10, "kink {a} vs sine {b}");
    }

    #[test]
    fn fig3_trapped_keeps_overlap() {
        let c = ScenarioName::Fig3Trapped.preset();
        let r = run_scenario(&c).unwrap();
        let d = r.dynamics_summary.unwrap();
        assert!(d.final_overlap_initial >= 0.99, "overlap {}", d.final_overlap_initial);
        assert!(d.max_norm_drift < 1e-12);
    }

    #[test]
    fn fig3_free_spreads() {
        let c = ScenarioName::Fig3Free.preset();
        let r = run_scenario(&c).unwrap();
        let d = r.dynamics_summary.unwrap();
        assert!(
            d.final_rms_width >= 2.0 * d.initial_rms_width,
            "initial {} final {}",
            d.initial_rms_width,
            d.final_rms_width
        );
    }

    #[test]
    fn zeromode_profile_scenario_reports_residual() {
        let c = ScenarioName::ZeromodeProfile.preset();
        let r = run_scenario(&c).unwrap();
        let z = r.zero_mode_summary.unwrap();
        assert!(z.normalizable);
        assert!(z.hamiltonian_residual < 1e-2);
        assert_eq!(z.nu, 1.0);
        assert_eq!(r.evolution.unwrap().snapshots.len(), 1);
    }

    #[test]
    fn small_noise_ensemble_tracks_oracle() {
        let mut c = ScenarioName::Fig5bNoise30.preset();
        c.sweep_count = 41; // enough to bracket the mid-gap window
        let report = noise_ensemble(&c, 0.3, 5).unwrap();
        assert_eq!(report.per_seed.len(), 5);
        assert!(report.max_oracle_deviation < 1e-10);
        assert!(report.per_seed.windows(2).all(|w| w[0].seed < w[1].seed));
        for s in &report.per_seed {
            assert!((s.peak_t2 - s.oracle_t2).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_amplitude_ensemble_is_unity() {
        let mut c = ScenarioName::Fig5bNoise30.preset();
        c.sweep_count = 41;
        let report = noise_ensemble(&c, 0.0, 3).unwrap();
        for s in &report.per_seed {
            assert!((s.peak_t2 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mixing_sweep_keeps_zero_mode() {
        let mut c = ScenarioName::Fig5cDs20.preset();
        c.sweep_count = 201;
        let entries = mixing_angle_sweep(&c, &[0.2]).unwrap();
        assert_eq!(entries.len(), 1);
        let e = &entries[0];
        assert!((e.midgap_peak_t2 - 1.0).abs() < 1e-10);
        assert!(e.gap_depth_t2 < 1e-6, "gap depth {}", e.gap_depth_t2);
    }
}
