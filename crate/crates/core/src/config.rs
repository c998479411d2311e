//! Scenario configuration: a flat UTF-8 key/value format with dotted
//! sections, fully resolved against defaults so that every run is a pure
//! function of (config, seed).
//!
//! ```text
//! scenario = fig4b-kink
//! profile.theta = 75
//! noise.a = 0.3
//! noise.seed = 1
//! sweep.count = 801
//! mode = ideal
//! ```
//!
//! `#` starts a comment; blank lines are ignored; later assignments win.

use crate::error::{Error, Result};
use crate::experiments::ScenarioName;
use crate::scattering::ScatterMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Kink,
    Sine,
    Constant,
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kink" => Ok(ProfileKind::Kink),
            "sine" => Ok(ProfileKind::Sine),
            "constant" => Ok(ProfileKind::Constant),
            other => Err(Error::Parse {
                key: "profile.kind".into(),
                message: format!("expected kink|sine|constant, got `{other}`"),
            }),
        }
    }
}

impl std::fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProfileKind::Kink => "kink",
            ProfileKind::Sine => "sine",
            ProfileKind::Constant => "constant",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Gaussian,
    ZeroMode,
}

impl std::str::FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(InitialState::Gaussian),
            "zero-mode" => Ok(InitialState::ZeroMode),
            other => Err(Error::Parse {
                key: "evolve.initial".into(),
                message: format!("expected gaussian|zero-mode, got `{other}`"),
            }),
        }
    }
}

impl std::fmt::Display for InitialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitialState::Gaussian => "gaussian",
            InitialState::ZeroMode => "zero-mode",
        })
    }
}

/// Fully resolved description of one run. Field defaults reproduce the
/// laboratory-scale kink transmission experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioName>,
    /// Group velocity (μm/ms).
    pub v0: f64,
    /// Medium length (μm); the domain is [−L/2, +L/2].
    pub length: f64,
    /// Waveguide light speed (μm/ms).
    pub c_wg: f64,
    pub grid_cells: usize,
    pub profile_kind: ProfileKind,
    /// Opacity Θ = δ0·L/v0.
    pub theta: f64,
    /// Kink sharpness Λ = λ·L.
    pub sharpness: f64,
    /// Sine wavenumber k (1/μm).
    pub k: f64,
    /// Noise amplitude; 0 disables noise.
    pub noise_a: f64,
    pub noise_seed: u64,
    /// Mixing-angle fraction f with S = (1+f)·π/2.
    pub mixing_f: f64,
    pub mode: ScatterMode,
    /// Sweep bounds in units of δ0.
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_count: usize,
    pub evolve_steps: usize,
    pub evolve_stride: usize,
    pub evolve_sigma: f64,
    pub evolve_center: f64,
    pub initial_state: InitialState,
    /// Ensemble size; members use seeds 1..=count.
    pub ensemble_count: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: None,
            v0: 17.0,
            length: 300.0,
            c_wg: crate::model::WAVEGUIDE_LIGHT_SPEED,
            grid_cells: 3000,
            profile_kind: ProfileKind::Kink,
            theta: 75.0,
            sharpness: 6.0,
            k: 0.01,
            noise_a: 0.0,
            noise_seed: 1,
            mixing_f: 0.0,
            mode: ScatterMode::Ideal,
            sweep_min: -2.0,
            sweep_max: 2.0,
            sweep_count: 801,
            evolve_steps: 1000,
            evolve_stride: 100,
            evolve_sigma: 1.2,
            evolve_center: 0.0,
            initial_state: InitialState::Gaussian,
            ensemble_count: 50,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Parse {
        key: key.to_string(),
        message: format!("cannot parse `{value}`: {e}"),
    })
}

impl ScenarioConfig {
    /// Assign one `key = value` pair. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = Some(value.parse()?),
            "scale.v0" => self.v0 = parse_value(key, value)?,
            "scale.length" => self.length = parse_value(key, value)?,
            "scale.c" => self.c_wg = parse_value(key, value)?,
            "grid.cells" => self.grid_cells = parse_value(key, value)?,
            "profile.kind" => self.profile_kind = value.parse()?,
            "profile.theta" => self.theta = parse_value(key, value)?,
            "profile.sharpness" => self.sharpness = parse_value(key, value)?,
            "profile.k" => self.k = parse_value(key, value)?,
            "noise.a" => self.noise_a = parse_value(key, value)?,
            "noise.seed" => self.noise_seed = parse_value(key, value)?,
            "mixing.f" => self.mixing_f = parse_value(key, value)?,
            "mode" => self.mode = value.parse()?,
            "sweep.min" => self.sweep_min = parse_value(key, value)?,
            "sweep.max" => self.sweep_max = parse_value(key, value)?,
            "sweep.count" => self.sweep_count = parse_value(key, value)?,
            "evolve.steps" => self.evolve_steps = parse_value(key, value)?,
            "evolve.stride" => self.evolve_stride = parse_value(key, value)?,
            "evolve.sigma" => self.evolve_sigma = parse_value(key, value)?,
            "evolve.center" => self.evolve_center = parse_value(key, value)?,
            "evolve.initial" => self.initial_state = value.parse()?,
            "ensemble.count" => self.ensemble_count = parse_value(key, value)?,
            _ => {
                return Err(Error::Parse {
                    key: key.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Constraint checks that span multiple keys.
    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0) {
            return Err(Error::Parse { key: "scale.v0".into(), message: "must be positive".into() });
        }
        if !(self.length > 0.0) {
            return Err(Error::Parse {
                key: "scale.length".into(),
                message: "must be positive".into(),
            });
        }
        if self.grid_cells == 0 {
            return Err(Error::Parse { key: "grid.cells".into(), message: "must be positive".into() });
        }
        if !(0.0..1.0).contains(&self.noise_a) {
            return Err(Error::Parse { key: "noise.a".into(), message: "a out of range [0, 1)".into() });
        }
        if self.mixing_f.abs() >= 1.0 {
            return Err(Error::Parse {
                key: "mixing.f".into(),
                message: "|f| must be < 1 (sin S != 0)".into(),
            });
        }
        if !(self.sweep_min < self.sweep_max) || self.sweep_count < 2 {
            return Err(Error::Parse {
                key: "sweep.min".into(),
                message: "sweep must satisfy min < max and count >= 2".into(),
            });
        }
        if self.evolve_stride == 0 {
            return Err(Error::Parse {
                key: "evolve.stride".into(),
                message: "must be positive".into(),
            });
        }
        if !(self.evolve_sigma > 0.0) {
            return Err(Error::Parse {
                key: "evolve.sigma".into(),
                message: "must be positive".into(),
            });
        }
        Ok(())
    }

    /// Parse the documented key/value format. A `scenario` key anywhere in
    /// the text applies that scenario's preset first; all other assignments
    /// are applied on top in file order.
    pub fn parse(text: &str) -> Result<ScenarioConfig> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                key: format!("line {}", lineno + 1),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }

        let mut config = ScenarioConfig::default();
        for (key, value) in &pairs {
            if key == "scenario" {
                let name: ScenarioName = value.parse()?;
                config = name.preset();
            }
        }
        for (key, value) in &pairs {
            if key != "scenario" {
                config.set(key, value)?;
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Serialize the resolved config in canonical key order. Floats use the
    /// shortest round-trip representation, so parse(emit(c)) == c.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        if let Some(name) = self.scenario {
            out.push_str(&format!("scenario = {name}\n"));
        }
        out.push_str(&format!("scale.v0 = {}\n", self.v0));
        out.push_str(&format!("scale.length = {}\n", self.length));
        out.push_str(&format!("scale.c = {}\n", self.c_wg));
        out.push_str(&format!("grid.cells = {}\n", self.grid_cells));
        out.push_str(&format!("profile.kind = {}\n", self.profile_kind));
        out.push_str(&format!("profile.theta = {}\n", self.theta));
        out.push_str(&format!("profile.sharpness = {}\n", self.sharpness));
        out.push_str(&format!("profile.k = {}\n", self.k));
        out.push_str(&format!("noise.a = {}\n", self.noise_a));
        out.push_str(&format!("noise.seed = {}\n", self.noise_seed));
        out.push_str(&format!("mixing.f = {}\n", self.mixing_f));
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str(&format!("sweep.min = {}\n", self.sweep_min));
        out.push_str(&format!("sweep.max = {}\n", self.sweep_max));
        out.push_str(&format!("sweep.count = {}\n", self.sweep_count));
        out.push_str(&format!("evolve.steps = {}\n", self.evolve_steps));
        out.push_str(&format!("evolve.stride = {}\n", self.evolve_stride));
        out.push_str(&format!("evolve.sigma = {}\n", self.evolve_sigma));
        out.push_str(&format!("evolve.center = {}\n", self.evolve_center));
        out.push_str(&format!("evolve.initial = {}\n", self.initial_state));
        out.push_str(&format!("ensemble.count = {}\n", self.ensemble_count));
        out
    }

    /// δ0 in rad/ms implied by (Θ, v0, L).
    pub fn delta0(&self) -> f64 {
        self.theta * self.v0 / self.length
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_config_gets_defaults() {
        let c = ScenarioConfig::parse("scenario = fig4b-kink\n").unwrap();
        assert_eq!(c.scenario, Some(ScenarioName::Fig4bKink));
        assert_eq!(c.theta, 75.0);
        assert_eq!(c.sharpness, 6.0);
        assert_eq!(c.length, 300.0);
        assert_eq!(c.v0, 17.0);
        assert_eq!(c.sweep_count, 801);
        assert_eq!(c.profile_kind, ProfileKind::Kink);
    }

    #[test]
    fn noise_amplitude_out_of_range_is_a_parse_error() {
        let err = ScenarioConfig::parse("noise.a = 1.5\n").unwrap_err();
        match err {
            Error::Parse { key, message } => {
                assert_eq!(key, "noise.a");
                assert!(message.contains("out of range"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let err = ScenarioConfig::parse("profile.width = 3\n").unwrap_err();
        match err {
            Error::Parse { key, .. } => assert_eq!(key, "profile.width"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn emit_parse_round_trip_is_identity() {
        let mut c = ScenarioName::Fig5bNoise30.preset();
        c.noise_a = 0.23456789012345678;
        c.sweep_min = -1.875;
        c.mixing_f = 0.1;
        let emitted = c.emit();
        let reparsed = ScenarioConfig::parse(&emitted).unwrap();
        assert_eq!(reparsed, c);
        assert_eq!(reparsed.emit(), emitted);
    }

    #[test]
    fn comments_and_blanks_ignored_and_later_wins() {
        let text = "\n# a comment\nprofile.theta = 10 # trailing\n\nprofile.theta = 20\n";
        let c = ScenarioConfig::parse(text).unwrap();
        assert_eq!(c.theta, 20.0);
    }

    #[test]
    fn scenario_preset_applies_before_overrides() {
        let text = "grid.cells = 1234\nscenario = fig3-trapped\n";
        let c = ScenarioConfig::parse(text).unwrap();
        // preset loads first even though the key appears later...
        assert_eq!(c.v0, 1.0);
        assert_eq!(c.length, 40.0);
        // ...and explicit assignments still win
        assert_eq!(c.grid_cells, 1234);
    }

    #[test]
    fn garbage_line_is_an_error() {
        assert!(ScenarioConfig::parse("this is not a key value pair\n").is_err());
    }
}
