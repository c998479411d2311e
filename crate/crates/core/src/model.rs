//! Physical parameters, spatial grids, and mass-profile definitions shared by
//! the scattering and dynamics solvers.
//!
//! Internal units are micrometers and milliseconds; detunings are rad/ms.
//! Profile amplitudes are configured through the dimensionless opacity
//! Θ = δ0·L/v0 and kink sharpness Λ = λ·L, which pin the defaults
//! Θ = 75, Λ = 6 for a 300 μm medium at v0 = 17 μm/ms.

use crate::error::{Error, Result};
use crate::rng::{uniform_at, SplitMix64};

/// Width of one noise cell in μm. Noise values are piecewise constant on
/// cells of this size regardless of the solver grid.
pub const NOISE_CELL_WIDTH: f64 = 0.1;

/// Speed of light in the empty waveguide, in μm/ms. Enters only through the
/// time-derivative coefficient of the generalized propagation equation, where
/// it is utterly negligible against 1/v0; it is kept explicit (and
/// configurable) so the slow-light limit can be probed.
pub const WAVEGUIDE_LIGHT_SPEED: f64 = 2.997_924_58e11;

/// Group velocity, medium length, and domain placement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalScale {
    /// Group velocity v0 (μm/ms).
    pub v0: f64,
    /// Waveguide light speed (μm/ms); see [`WAVEGUIDE_LIGHT_SPEED`].
    pub c_wg: f64,
    /// Left edge of the medium (μm).
    pub z_min: f64,
    /// Right edge of the medium (μm).
    pub z_max: f64,
}

impl PhysicalScale {
    pub const DEFAULT_V0: f64 = 17.0;
    pub const DEFAULT_LENGTH: f64 = 300.0;

    /// Domain of length `length` centered on z = 0.
    pub fn new(v0: f64, length: f64) -> Result<Self> {
        if !(v0 > 0.0) || !v0.is_finite() {
            return Err(Error::Config(format!("v0 must be positive, got {v0}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!("length must be positive, got {length}")));
        }
        Ok(PhysicalScale {
            v0,
            c_wg: WAVEGUIDE_LIGHT_SPEED,
            z_min: -length / 2.0,
            z_max: length / 2.0,
        })
    }

    pub fn with_waveguide_speed(mut self, c_wg: f64) -> Self {
        self.c_wg = c_wg;
        self
    }

    pub fn length(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.z_min + self.z_max)
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.z_min && z <= self.z_max
    }

    /// δ0 from the dimensionless opacity Θ = δ0·L/v0.
    pub fn delta0_from_theta(&self, theta: f64) -> f64 {
        theta * self.v0 / self.length()
    }

    /// λ from the dimensionless sharpness Λ = λ·L.
    pub fn lambda_from_sharpness(&self, sharpness: f64) -> f64 {
        sharpness / self.length()
    }
}

impl Default for PhysicalScale {
    fn default() -> Self {
        PhysicalScale::new(Self::DEFAULT_V0, Self::DEFAULT_LENGTH).unwrap()
    }
}

/// Uniform cell grid over the medium. Profiles are sampled at cell midpoints,
/// which preserves odd symmetry exactly on symmetric domains.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    z_min: f64,
    z_max: f64,
    n_cells: usize,
    dz: f64,
}

impl Grid {
    pub fn new(scale: &PhysicalScale, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        Ok(Grid {
            z_min: scale.z_min,
            z_max: scale.z_max,
            n_cells,
            dz: scale.length() / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.z_min + (i as f64 + 0.5) * self.dz
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.midpoint(i))
    }

    /// Index of the cell containing z (edges clamp inward).
    pub fn cell_of(&self, z: f64) -> usize {
        let i = ((z - self.z_min) / self.dz).floor();
        (i.max(0.0) as usize).min(self.n_cells - 1)
    }

    /// Number of 0.1 μm noise cells spanning the domain.
    pub fn n_noise_cells(&self) -> usize {
        ((self.z_max - self.z_min) / NOISE_CELL_WIDTH).ceil() as usize
    }

    /// A solver grid is noise-compatible when each solver cell lies inside a
    /// single noise cell: Δz must divide the 0.1 μm noise cell width.
    pub fn noise_compatible(&self) -> bool {
        if self.dz > NOISE_CELL_WIDTH * (1.0 + 1e-12) {
            return false;
        }
        let ratio = NOISE_CELL_WIDTH / self.dz;
        (ratio - ratio.round()).abs() < 1e-9
    }
}

/// Per-profile multiplicative noise: δ(z) → δ(z)·(1 + ε(z)) with ε piecewise
/// constant on 0.1 μm cells and uniform in [−a, +a].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(amplitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::Config(format!(
                "noise amplitude must satisfy 0 <= a < 1, got {amplitude}"
            )));
        }
        Ok(NoiseSpec { amplitude, seed })
    }
}

/// ε values for `n_noise_cells` successive 0.1 μm cells: ε_i = a·(2u_i − 1)
/// with u_i the splitmix64 stream of `spec.seed`. A pure function of
/// (amplitude, seed, n_noise_cells).
pub fn generate_noise(spec: &NoiseSpec, n_noise_cells: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(spec.seed);
    (0..n_noise_cells)
        .map(|_| spec.amplitude * (2.0 * rng.next_uniform() - 1.0))
        .collect()
}

/// Spatial two-photon-detuning field δ(z).
#[derive(Clone, Debug, PartialEq)]
pub enum MassProfile {
    /// δ0·tanh(λz): the soliton (kink) interpolating −δ0 → +δ0.
    Kink { delta0: f64, lambda: f64 },
    /// δ0·sin(kz): same topology as the kink for k·L/2 in (0, π).
    Sine { delta0: f64, k: f64 },
    /// Uniform mass; opens a gap with no bound state.
    Constant { delta0: f64 },
    /// Piecewise-constant per-cell values.
    Sampled(SampledProfile),
    /// Multiplicative noise on top of a base profile.
    Noisy { base: Box<MassProfile>, noise: NoiseSpec },
}

impl MassProfile {
    /// Kink with amplitude and width given dimensionlessly (Θ, Λ).
    pub fn kink_dimensionless(theta: f64, sharpness: f64, scale: &PhysicalScale) -> Self {
        MassProfile::Kink {
            delta0: scale.delta0_from_theta(theta),
            lambda: scale.lambda_from_sharpness(sharpness),
        }
    }

    pub fn with_noise(self, noise: NoiseSpec) -> Self {
        MassProfile::Noisy { base: Box::new(self), noise }
    }

    /// δ(z), measured from the domain center. Errors if z lies outside the
    /// domain. For `Noisy`, the base value is scaled by (1 + ε) of the 0.1 μm
    /// noise cell containing z.
    pub fn value_at(&self, z: f64, scale: &PhysicalScale) -> Result<f64> {
        if !scale.contains(z) {
            return Err(Error::Domain(format!(
                "z = {z} outside [{}, {}]",
                scale.z_min, scale.z_max
            )));
        }
        let zc = z - scale.center();
        Ok(match self {
            MassProfile::Kink { delta0, lambda } => delta0 * (lambda * zc).tanh(),
            MassProfile::Sine { delta0, k } => delta0 * (k * zc).sin(),
            MassProfile::Constant { delta0 } => *delta0,
            MassProfile::Sampled(sampled) => sampled.values[sampled.grid.cell_of(z)],
            MassProfile::Noisy { base, noise } => {
                let n_noise = ((scale.length()) / NOISE_CELL_WIDTH).ceil() as u64;
                let idx = (((z - scale.z_min) / NOISE_CELL_WIDTH).floor() as u64).min(n_noise - 1);
                let eps = noise.amplitude * (2.0 * uniform_at(noise.seed, idx) - 1.0);
                base.value_at(z, scale)? * (1.0 + eps)
            }
        })
    }

    /// Piecewise-constant per-cell values at cell midpoints. Deterministic
    /// for a fixed noise seed. Errors when a noisy profile is sampled on a
    /// grid whose Δz is incompatible with the 0.1 μm noise cells.
    pub fn sample(&self, grid: &Grid, scale: &PhysicalScale) -> Result<SampledProfile> {
        if self.has_noise() && !grid.noise_compatible() {
            return Err(Error::Config(format!(
                "grid Δz = {} μm incompatible with {} μm noise cells (Δz must divide the noise cell width)",
                grid.dz(),
                NOISE_CELL_WIDTH
            )));
        }
        let values = match self {
            MassProfile::Noisy { base, noise } => {
                // Materialize the noise sequence once; index per midpoint.
                let eps = generate_noise(noise, grid.n_noise_cells());
                let inner = base.sample(grid, scale)?;
                grid.midpoints()
                    .zip(inner.values)
                    .map(|(z, v)| {
                        let idx = (((z - grid.z_min()) / NOISE_CELL_WIDTH).floor() as usize)
                            .min(eps.len() - 1);
                        v * (1.0 + eps[idx])
                    })
                    .collect()
            }
            _ => grid
                .midpoints()
                .map(|z| self.value_at(z, scale))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(SampledProfile { grid: grid.clone(), values })
    }

    pub fn has_noise(&self) -> bool {
        match self {
            MassProfile::Noisy { .. } => true,
            MassProfile::Sampled(_) => false,
            _ => false,
        }
    }
}

/// A profile reduced to per-cell constants on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProfile {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledProfile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::Config(format!(
                "sampled profile has {} values for a {}-cell grid",
                values.len(),
                grid.n_cells()
            )));
        }
        Ok(SampledProfile { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Midpoint-rule integral ∫δ(z)dz over the domain.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dz()
    }

    /// The spatially reversed profile δ(z) → δ(z_min + z_max − z).
    pub fn reversed(&self) -> SampledProfile {
        let mut values = self.values.clone();
        values.reverse();
        SampledProfile { grid: self.grid.clone(), values }
    }
}

/// Control-field mixing angle S = (1 + f)·π/2.
///
/// sin S and cos S are evaluated through the shifted identities
/// sin S = cos(fπ/2), cos S = −sin(fπ/2), which are exact at f = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingAngle {
    f: f64,
}

impl MixingAngle {
    pub fn new(f: f64) -> Result<Self> {
        if !(f.abs() < 1.0) {
            return Err(Error::Config(format!(
                "mixing fraction must satisfy |f| < 1 (sin S != 0), got {f}"
            )));
        }
        Ok(MixingAngle { f })
    }

    pub fn ideal() -> Self {
        MixingAngle { f: 0.0 }
    }

    pub fn fraction(&self) -> f64 {
        self.f
    }

    pub fn angle(&self) -> f64 {
        (1.0 + self.f) * std::f64::consts::FRAC_PI_2
    }

    pub fn sin_s(&self) -> f64 {
        (self.f * std::f64::consts::FRAC_PI_2).cos()
    }

    pub fn cos_s(&self) -> f64 {
        -(self.f * std::f64::consts::FRAC_PI_2).sin()
    }
}

/// Real coefficients of the generalized stationary generator
/// N = iΔω·A·σ_z + Δω·B·σ_y − C(z)·σ_x.
///
/// A carries the waveguide-vacuum term 1/c_wg next to the slow-light term
/// 1/(v0·sin²S); at laboratory parameters the former is ~12 orders below the
/// latter, and the limit c_wg → 1 (units of the waveguide light speed)
/// recovers the textbook form 1 + 1/(v0·sin²S).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientSet {
    /// σ_z frequency coefficient (ms/μm).
    pub a: f64,
    /// σ_y frequency coefficient (ms/μm).
    pub b: f64,
    /// σ_x mass coefficient (1/μm).
    pub c: f64,
}

impl CoefficientSet {
    pub fn new(mixing: &MixingAngle, scale: &PhysicalScale, delta: f64) -> Self {
        let sin_s = mixing.sin_s();
        let sin2 = sin_s * sin_s;
        CoefficientSet {
            a: 1.0 / scale.c_wg + 1.0 / (scale.v0 * sin2),
            b: mixing.cos_s() / (scale.v0 * sin2),
            c: delta / (scale.v0 * sin_s),
        }
    }
}

/// Operation form of [`CoefficientSet::new`].
pub fn coefficients(mixing: &MixingAngle, scale: &PhysicalScale, delta: f64) -> CoefficientSet {
    CoefficientSet::new(mixing, scale, delta)
}
