//! Stationary monochromatic scattering through a sampled mass profile.
//!
//! Each grid cell carries a constant detuning, so the propagator across a
//! cell is the exact exponential of a traceless 2x2 generator and the total
//! transfer matrix is an ordered product of cell propagators. Reflection and
//! transmission follow from the boundary conditions of a unit wave incident
//! from the left.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dd::{DdComplex, DdMat2};
use crate::error::{Error, Result};
use crate::model::{CoefficientSet, MixingAngle, PhysicalScale, SampledProfile};

/// Which propagation equation generates the scattering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterMode {
    /// The Dirac limit S = π/2: N = (iΔω/v0)σ_z − (δ/v0)σ_x.
    Ideal,
    /// Finite mixing angle: N = iΔω·A·σ_z + Δω·B·σ_y − C·σ_x.
    Generalized,
}

impl std::str::FromStr for ScatterMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(ScatterMode::Ideal),
            "generalized" => Ok(ScatterMode::Generalized),
            other => Err(Error::Parse {
                key: "mode".into(),
                message: format!("expected `ideal` or `generalized`, got `{other}`"),
            }),
        }
    }
}

impl std::fmt::Display for ScatterMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScatterMode::Ideal => "ideal",
            ScatterMode::Generalized => "generalized",
        })
    }
}

/// Traceless generator N = i·gz·σ_z + by·σ_y + ax·σ_x of the first-order
/// system ψ' = Nψ. The Pauli coefficients are real in both modes, which makes
/// s² = −det N = ax² + by² − gz² real as well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorMatrix {
    /// Coefficient of σ_x (1/μm).
    pub ax: f64,
    /// Coefficient of σ_y (1/μm).
    pub by: f64,
    /// Imaginary σ_z coefficient: the σ_z term is i·gz (1/μm).
    pub gz: f64,
}

impl GeneratorMatrix {
    /// Complex 2x2 entries [[n11, n12], [n21, n22]].
    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(0.0, self.gz),
                Complex64::new(self.ax, -self.by),
            ],
            [
                Complex64::new(self.ax, self.by),
                Complex64::new(0.0, -self.gz),
            ],
        ]
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    pub fn det(&self) -> Complex64 {
        let e = self.entries();
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    /// s² = −det N, real.
    pub fn s_squared(&self) -> f64 {
        self.ax * self.ax + self.by * self.by - self.gz * self.gz
    }
}

/// Generator for one cell of constant detuning `delta` probed at `delta_omega`.
pub fn generator_matrix(
    delta_omega: f64,
    delta: f64,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
    mode: ScatterMode,
) -> GeneratorMatrix {
    match mode {
        ScatterMode::Ideal => GeneratorMatrix {
            ax: -delta / scale.v0,
            by: 0.0,
            gz: delta_omega / scale.v0,
        },
        ScatterMode::Generalized => {
            let CoefficientSet { a, b, c } = CoefficientSet::new(mixing, scale, delta);
            GeneratorMatrix {
                ax: -c,
                by: delta_omega * b,
                gz: delta_omega * a,
            }
        }
    }
}

/// cosh(√u) and sinh(√u)/√u as functions of u = s², valid for either sign
/// of u (u < 0 gives cos and sinc of √−u).
///
/// For |u| ≤ 1/4 both factors come from their Taylor series in u, which keeps
/// the pair consistent to well under an ulp through the turning-point region
/// where u crosses zero; the per-cell determinant check depends on that.
pub(crate) fn hyperbolic_factors(u: f64) -> (f64, f64) {
    if u.abs() <= 0.25 {
        // cosh(√u) = Σ u^k/(2k)!, sinh(√u)/√u = Σ u^k/(2k+1)!
        let ch = horner(
            u,
            &[
                1.0,
                1.0 / 2.0,
                1.0 / 24.0,
                1.0 / 720.0,
                1.0 / 40_320.0,
                1.0 / 3_628_800.0,
                1.0 / 479_001_600.0,
                1.0 / 87_178_291_200.0,
                1.0 / 20_922_789_888_000.0,
            ],
        );
        let shc = horner(
            u,
            &[
                1.0,
                1.0 / 6.0,
                1.0 / 120.0,
                1.0 / 5_040.0,
                1.0 / 362_880.0,
                1.0 / 39_916_800.0,
                1.0 / 6_227_020_800.0,
                1.0 / 1_307_674_368_000.0,
                1.0 / 355_687_428_096_000.0,
            ],
        );
        (ch, shc)
    } else if u > 0.0 {
        let s = u.sqrt();
        (s.cosh(), s.sinh() / s)
    } else {
        let k = (-u).sqrt();
        (k.cos(), k.sin() / k)
    }
}

fn horner(x: f64, coeffs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// 2x2 complex transfer matrix mapping the spinor at z_min to z_max.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub w11: Complex64,
    pub w12: Complex64,
    pub w21: Complex64,
    pub w22: Complex64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        TransferMatrix {
            w11: Complex64::new(1.0, 0.0),
            w12: Complex64::new(0.0, 0.0),
            w21: Complex64::new(0.0, 0.0),
            w22: Complex64::new(1.0, 0.0),
        }
    }

    /// Matrix product self·rhs (rhs acts first).
    pub fn compose(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            w11: self.w11 * rhs.w11 + self.w12 * rhs.w21,
            w12: self.w11 * rhs.w12 + self.w12 * rhs.w22,
            w21: self.w21 * rhs.w11 + self.w22 * rhs.w21,
            w22: self.w21 * rhs.w12 + self.w22 * rhs.w22,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.w11 * self.w22 - self.w12 * self.w21
    }

    pub fn max_abs(&self) -> f64 {
        self.w11
            .norm()
            .max(self.w12.norm())
            .max(self.w21.norm())
            .max(self.w22.norm())
    }

    /// Max-norm of W†σ_zW − σ_z, scaled by max(1, ‖W‖²_max).
    ///
    /// The scale keeps the measure meaningful for strongly attenuating
    /// profiles, where the entries themselves reach e^Θ and an absolute
    /// defect below the entry rounding is unrepresentable.
    pub fn pseudo_unitarity_defect(&self) -> f64 {
        let (a, b, c, d) = (self.w11, self.w12, self.w21, self.w22);
        // W†σ_zW entries
        let m11 = a.norm_sqr() - c.norm_sqr();
        let m22 = b.norm_sqr() - d.norm_sqr();
        let m12 = a.conj() * b - c.conj() * d;
        let defect = (m11 - 1.0)
            .abs()
            .max((m22 + 1.0).abs())
            .max(m12.norm());
        let scale = self.max_abs().powi(2).max(1.0);
        defect / scale
    }

    /// Reflection and transmission amplitudes for a unit wave incident from
    /// the left: boundary conditions ψ(z_min) = (1, R), ψ(z_max) = (T, 0),
    /// giving R = −W21/W22 and T = 1/W22 via det W = 1.
    pub fn reflect_transmit(&self) -> Result<(Complex64, Complex64)> {
        let w22_abs = self.w22.norm();
        if w22_abs < 1e-300 {
            return Err(Error::SingularBoundary { w22_abs });
        }
        Ok((-self.w21 / self.w22, 1.0 / self.w22))
    }
}

/// Exact propagator W = exp(N·Δz) of a traceless generator:
/// W = cosh(sΔz)·I + (sinh(sΔz)/s)·N with s² = −det N.
pub fn cell_propagator(n: &GeneratorMatrix, dz: f64) -> TransferMatrix {
    let u = n.s_squared() * dz * dz;
    let (ch, shc) = hyperbolic_factors(u);
    let ax = shc * n.ax * dz;
    let by = shc * n.by * dz;
    let gz = shc * n.gz * dz;
    TransferMatrix {
        w11: Complex64::new(ch, gz),
        w12: Complex64::new(ax, -by),
        w21: Complex64::new(ax, by),
        w22: Complex64::new(ch, -gz),
    }
}

/// Deviation of the determinant of a freshly built cell propagator from 1,
/// evaluated cancellation-free from the cell factors. With ch = 1 + x and
/// shc = 1 + y, det − 1 = x(2 + x) − u(1 + y)² where every term is O(u).
fn cell_det_deviation(ch: f64, shc: f64, u: f64) -> f64 {
    let x = ch - 1.0;
    let y = shc - 1.0;
    x * (2.0 + x) - u * (1.0 + y) * (1.0 + y)
}

struct CellIter<'a> {
    values: &'a [f64],
    dz: f64,
    ax_per_delta: f64,
    by: f64,
    gz: f64,
}

impl CellIter<'_> {
    fn new(
        profile: &SampledProfile,
        delta_omega: f64,
        scale: &PhysicalScale,
        mixing: &MixingAngle,
        mode: ScatterMode,
    ) -> CellIter<'_> {
        let dz = profile.grid().dz();
        match mode {
            ScatterMode::Ideal => CellIter {
                values: profile.values(),
                dz,
                ax_per_delta: -1.0 / scale.v0,
                by: 0.0,
                gz: delta_omega / scale.v0,
            },
            ScatterMode::Generalized => {
                let coeff = CoefficientSet::new(mixing, scale, 1.0);
                CellIter {
                    values: profile.values(),
                    dz,
                    ax_per_delta: -coeff.c,
                    by: delta_omega * coeff.b,
                    gz: delta_omega * coeff.a,
                }
            }
        }
    }

    /// Cell propagator for cell `i` plus its determinant deviation.
    fn cell(&self, i: usize) -> (TransferMatrix, f64) {
        let ax = self.ax_per_delta * self.values[i] * self.dz;
        let by = self.by * self.dz;
        let gz = self.gz * self.dz;
        let u = ax * ax + by * by - gz * gz;
        let (ch, shc) = hyperbolic_factors(u);
        let m = TransferMatrix {
            w11: Complex64::new(ch, shc * gz),
            w12: Complex64::new(shc * ax, -shc * by),
            w21: Complex64::new(shc * ax, shc * by),
            w22: Complex64::new(ch, -shc * gz),
        };
        (m, cell_det_deviation(ch, shc, u))
    }
}

/// Composition order for the cell product.
///
/// At Δω = 0 every cell generator is proportional to σ_x, so all cells
/// commute and the product may be accumulated center-out in mirror pairs.
/// For odd profiles this keeps partial products O(1) instead of e^Θ, which
/// is what makes the zero-mode resonance computable at all in f64. At any
/// other frequency the cells do not commute and the order is left-to-right.
fn composition_order(n: usize, zero_frequency: bool) -> Vec<usize> {
    if !zero_frequency {
        return (0..n).collect();
    }
    let mut order = Vec::with_capacity(n);
    let mut lo = n / 2;
    let mut hi = n / 2;
    if n % 2 == 1 {
        order.push(n / 2);
        hi += 1;
    }
    while lo > 0 {
        lo -= 1;
        order.push(lo);
        order.push(hi);
        hi += 1;
    }
    order
}

const OVERFLOW_LIMIT: f64 = 1e300;
/// Above this flux/pseudo-unitarity deviation the point is recomputed with
/// compensated accumulation; see `dd`.
const REFINE_THRESHOLD: f64 = 1e-12;

fn overflow_diag(entry: f64) -> Error {
    Error::Overflow(format!(
        "transfer-matrix entry reached {entry:.3e}; the opacity is too large for \
         the requested cell size - rescale the profile or renormalize mid-product"
    ))
}

/// Ordered product of cell propagators with its accumulated determinant
/// deviation (Neumaier sum of per-cell deviations).
fn accumulate_plain(cells: &CellIter<'_>, order: &[usize]) -> Result<(TransferMatrix, f64)> {
    let mut w = TransferMatrix::identity();
    let mut det_dev = 0.0f64;
    let mut det_comp = 0.0f64;
    for &i in order {
        let (cell, ddev) = cells.cell(i);
        let t = det_dev + ddev;
        det_comp += if det_dev.abs() >= ddev.abs() {
            (det_dev - t) + ddev
        } else {
            (ddev - t) + det_dev
        };
        det_dev = t;
        w = cell.compose(&w);
        if w.max_abs() > OVERFLOW_LIMIT {
            return Err(overflow_diag(w.max_abs()));
        }
    }
    Ok((w, det_dev + det_comp))
}

fn accumulate_compensated(cells: &CellIter<'_>, order: &[usize]) -> Result<DdMat2> {
    let mut w = DdMat2::identity();
    for &i in order {
        let (cell, _) = cells.cell(i);
        w.premul(cell.w11, cell.w12, cell.w21, cell.w22);
        let mx = cell.w11.norm().max(cell.w22.norm());
        if w.a11.value().norm().max(w.a22.value().norm()) * mx > OVERFLOW_LIMIT {
            return Err(overflow_diag(w.a11.value().norm()));
        }
    }
    Ok(w)
}

/// Total transfer matrix across the whole sampled profile.
pub fn total_transfer(
    profile: &SampledProfile,
    delta_omega: f64,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
    mode: ScatterMode,
) -> Result<TransferMatrix> {
    let cells = CellIter::new(profile, delta_omega, scale, mixing, mode);
    let order = composition_order(profile.grid().n_cells(), delta_omega == 0.0);
    Ok(accumulate_plain(&cells, &order)?.0)
}

/// One spectrum sample: probe detuning, complex amplitudes, and intensities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScatterPoint {
    /// Probe detuning Δω (rad/ms).
    pub delta_omega: f64,
    pub r_re: f64,
    pub r_im: f64,
    pub t_re: f64,
    pub t_im: f64,
    /// |R|²
    pub r2: f64,
    /// |T|²
    pub t2: f64,
}

impl ScatterPoint {
    pub fn r(&self) -> Complex64 {
        Complex64::new(self.r_re, self.r_im)
    }

    pub fn t(&self) -> Complex64 {
        Complex64::new(self.t_re, self.t_im)
    }
}

/// Worst-case deviations observed while assembling a spectrum.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct InvariantChecks {
    /// max over points of ||R|² + |T|² − 1|
    pub max_flux_deviation: f64,
    /// max over points of |Π det(cell) − 1|
    pub max_det_deviation: f64,
    /// max over points of the scaled pseudo-unitarity defect
    pub max_pseudo_unitarity_defect: f64,
}

impl InvariantChecks {
    pub fn merge(&self, other: &InvariantChecks) -> InvariantChecks {
        InvariantChecks {
            max_flux_deviation: self.max_flux_deviation.max(other.max_flux_deviation),
            max_det_deviation: self.max_det_deviation.max(other.max_det_deviation),
            max_pseudo_unitarity_defect: self
                .max_pseudo_unitarity_defect
                .max(other.max_pseudo_unitarity_defect),
        }
    }
}

/// Scattering record at a single frequency, with its invariant checks.
pub fn scatter_at(
    profile: &SampledProfile,
    delta_omega: f64,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
    mode: ScatterMode,
) -> Result<(ScatterPoint, InvariantChecks)> {
    let cells = CellIter::new(profile, delta_omega, scale, mixing, mode);
    let order = composition_order(profile.grid().n_cells(), delta_omega == 0.0);
    let (w, det_dev) = accumulate_plain(&cells, &order)?;
    let (r, t) = w.reflect_transmit()?;
    let flux_dev = (r.norm_sqr() + t.norm_sqr() - 1.0).abs();
    let pu = w.pseudo_unitarity_defect();

    let (point, flux_dev, pu) = if flux_dev > REFINE_THRESHOLD || pu > REFINE_THRESHOLD {
        // Quasi-bound resonances make the plain product cancel internally;
        // redo the accumulation in double-double and read R, T from it.
        let wd = accumulate_compensated(&cells, &order)?;
        let w22 = wd.a22;
        if w22.value().norm() < 1e-300 {
            return Err(Error::SingularBoundary { w22_abs: w22.value().norm() });
        }
        let minus_w21 = DdComplex {
            re: crate::dd::Dd { hi: -wd.a21.re.hi, lo: -wd.a21.re.lo },
            im: crate::dd::Dd { hi: -wd.a21.im.hi, lo: -wd.a21.im.lo },
        };
        let r_dd = minus_w21.div(w22);
        let t_dd = DdComplex::from_c64(Complex64::new(1.0, 0.0)).div(w22);
        let r2 = r_dd.norm_sqr().value();
        let t2 = t_dd.norm_sqr().value();
        let point = ScatterPoint {
            delta_omega,
            r_re: r_dd.value().re,
            r_im: r_dd.value().im,
            t_re: t_dd.value().re,
            t_im: t_dd.value().im,
            r2,
            t2,
        };
        let w_collapsed = TransferMatrix {
            w11: wd.a11.value(),
            w12: wd.a12.value(),
            w21: wd.a21.value(),
            w22: wd.a22.value(),
        };
        ((point, (r2 + t2 - 1.0).abs(), w_collapsed.pseudo_unitarity_defect()))
    } else {
        (
            ScatterPoint {
                delta_omega,
                r_re: r.re,
                r_im: r.im,
                t_re: t.re,
                t_im: t.im,
                r2: r.norm_sqr(),
                t2: t.norm_sqr(),
            },
            flux_dev,
            pu,
        )
    };

    Ok((
        point,
        InvariantChecks {
            max_flux_deviation: flux_dev,
            max_det_deviation: det_dev.abs(),
            max_pseudo_unitarity_defect: pu,
        },
    ))
}

/// Reflection/transmission spectrum over a frequency sweep.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    /// Reference detuning δ0 (rad/ms): the frequency axis is Δω/δ0.
    pub delta0: f64,
    pub points: Vec<ScatterPoint>,
    pub checks: InvariantChecks,
}

/// Spectrum over the given frequencies (rad/ms, strictly increasing).
/// Points are computed independently in parallel; output order matches the
/// input order.
pub fn spectrum(
    profile: &SampledProfile,
    frequencies: &[f64],
    delta0: f64,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
    mode: ScatterMode,
) -> Result<Spectrum> {
    if frequencies.is_empty() {
        return Err(Error::Config("frequency sweep is empty".into()));
    }
    if frequencies.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("frequency sweep must be strictly increasing".into()));
    }
    let results: Vec<(ScatterPoint, InvariantChecks)> = frequencies
        .par_iter()
        .map(|&f| scatter_at(profile, f, scale, mixing, mode))
        .collect::<Result<_>>()?;
    let mut checks = InvariantChecks::default();
    let mut points = Vec::with_capacity(results.len());
    for (p, c) in results {
        checks = checks.merge(&c);
        points.push(p);
    }
    Ok(Spectrum { delta0, points, checks })
}

/// Evenly spaced sweep in units of δ0 that hits symmetric endpoints and, for
/// symmetric ranges with odd counts, the exact midpoint 0. The zero-mode
/// resonance is far narrower than any floating-point neighborhood of zero, so
/// landing on Δω = 0 exactly matters.
pub fn sweep_frequencies(min: f64, max: f64, count: usize, delta0: f64) -> Result<Vec<f64>> {
    if count < 2 || !(min < max) {
        return Err(Error::Config(format!(
            "sweep must have at least 2 points and min < max, got [{min}, {max}] x {count}"
        )));
    }
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (min + (max - min) * t) * delta0
        })
        .collect())
}

/// Zero-frequency transmission from the commuting σ_x algebra:
/// |T|² = sech²Φ, |R|² = tanh²Φ with Φ = ∫δ(z)dz / (v0·sin S).
///
/// This is the analytic oracle the transfer-matrix pipeline is cross-checked
/// against; it shares no code with the matrix product.
pub fn zero_frequency_transmission(
    profile: &SampledProfile,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
) -> (f64, f64) {
    let phi = profile.integral() / (scale.v0 * mixing.sin_s());
    let t2 = 1.0 / phi.cosh().powi(2);
    let r2 = phi.tanh().powi(2);
    (r2, t2)
}

/// Exponent Φ of the zero-frequency oracle for a given profile.
pub fn zero_frequency_exponent(
    profile: &SampledProfile,
    scale: &PhysicalScale,
    mixing: &MixingAngle,
) -> f64 {
    profile.integral() / (scale.v0 * mixing.sin_s())
}

/// Maximizing frequency and value of |T|² restricted to |Δω| < 0.5·δ0.
pub fn midgap_peak(spectrum: &Spectrum) -> Result<(f64, f64)> {
    let half_gap = 0.5 * spectrum.delta0;
    spectrum
        .points
        .iter()
        .filter(|p| p.delta_omega.abs() < half_gap)
        .map(|p| (p.delta_omega, p.t2))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| {
            Error::Domain("spectrum contains no points inside |delta_omega| < 0.5 delta0".into())
        })
}

/// Outermost frequencies at which |T|² crosses 0.5, linearly interpolated; a
/// stable proxy for the gap edges. None when the spectrum never crosses.
pub fn gap_edges(spectrum: &Spectrum) -> Option<(f64, f64)> {
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    for w in spectrum.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if (a.t2 - 0.5) * (b.t2 - 0.5) <= 0.0 && a.t2 != b.t2 {
            let t = (0.5 - a.t2) / (b.t2 - a.t2);
            let f = a.delta_omega + t * (b.delta_omega - a.delta_omega);
            lo = Some(lo.map_or(f, |v: f64| v.min(f)));
            hi = Some(hi.map_or(f, |v: f64| v.max(f)));
        }
    }
    lo.zip(hi)
}
