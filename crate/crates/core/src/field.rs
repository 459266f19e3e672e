//! Coherence kernels of a quasi-monochromatic, spin-polarized chaotic beam.
//!
//! The beam has a Gaussian energy spectrum. Its complex degree of coherence
//! between two detection events depends only on the effective delay
//!
//! ```text
//! tau_eff = (t2 - t1) - axis . (r2 - r1) / v
//! ```
//!
//! so points lying on a common ray `r2 - r1 = v (t2 - t1) axis` are fully
//! coherent. The lineshape convention is
//!
//! ```text
//! gamma(tau) = exp(-i omega0 tau) * exp(-pi tau^2 / (2 Tc^2))
//! ```
//!
//! which makes `integral |gamma(tau)|^2 dtau = Tc`, i.e. the coherence time
//! is the equivalent width of `|gamma|^2`. Transverse coherence is not
//! modelled and all detectors see the same intensity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

/// Planck constant in eV s.
pub const PLANCK_EV_S: f64 = 4.135667696e-15;

/// Largest number of points a kernel may be built over.
pub const MAX_KERNEL_POINTS: usize = 512;

/// A detection event location: position in metres, time in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub r: [f64; 3],
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(r: [f64; 3], t: f64) -> Self {
        Self { r, t }
    }

    /// A point at the origin at time `t`.
    pub fn at_time(t: f64) -> Self {
        Self { r: [0.0; 3], t }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.r.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineShape {
    Gaussian,
}

/// Beam description. Deserialized from
/// `{"shape":"gaussian","omega0_rad_per_s":..,"coherence_time_s":..,
/// "group_speed_m_per_s":..,"axis":[x,y,z],"intensity_per_m2_s":..}`
/// and validated on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectralModel")]
pub struct SpectralModel {
    pub shape: LineShape,
    #[serde(rename = "omega0_rad_per_s")]
    pub omega0: f64,
    #[serde(rename = "coherence_time_s")]
    pub coherence_time: f64,
    #[serde(rename = "group_speed_m_per_s")]
    pub group_speed: f64,
    pub axis: [f64; 3],
    #[serde(rename = "intensity_per_m2_s")]
    pub intensity: f64,
}

#[derive(Deserialize)]
struct RawSpectralModel {
    shape: LineShape,
    omega0_rad_per_s: f64,
    coherence_time_s: f64,
    group_speed_m_per_s: f64,
    axis: [f64; 3],
    intensity_per_m2_s: f64,
}

impl TryFrom<RawSpectralModel> for SpectralModel {
    type Error = Error;

    fn try_from(raw: RawSpectralModel) -> Result<Self> {
        let model = SpectralModel {
            shape: raw.shape,
            omega0: raw.omega0_rad_per_s,
            coherence_time: raw.coherence_time_s,
            group_speed: raw.group_speed_m_per_s,
            axis: raw.axis,
            intensity: raw.intensity_per_m2_s,
        };
        model.validate()?;
        Ok(model)
    }
}

impl SpectralModel {
    /// Gaussian beam along `+z` with unit intensity and no carrier.
    pub fn gaussian(coherence_time: f64) -> Result<Self> {
        let model = Self {
            shape: LineShape::Gaussian,
            omega0: 0.0,
            coherence_time,
            group_speed: 1.0,
            axis: [0.0, 0.0, 1.0],
            intensity: 1.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !self.omega0.is_finite() {
            return bad(format!("omega0 must be finite, got {}", self.omega0));
        }
        if !(self.coherence_time > 0.0 && self.coherence_time.is_finite()) {
            return bad(format!("coherence time must be positive, got {}", self.coherence_time));
        }
        if !(self.group_speed > 0.0 && self.group_speed.is_finite()) {
            return bad(format!("group speed must be positive, got {}", self.group_speed));
        }
        let norm = self.axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm.is_nan() || (norm - 1.0).abs() > 1e-12 {
            return bad(format!("axis must be a unit vector, |axis| = {norm}"));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return bad(format!("intensity must be non-negative, got {}", self.intensity));
        }
        Ok(())
    }

    /// `tau_eff` from `p1` to `p2`.
    pub fn effective_delay(&self, p1: &SpacetimePoint, p2: &SpacetimePoint) -> f64 {
        let along_axis: f64 = (0..3).map(|c| self.axis[c] * (p2.r[c] - p1.r[c])).sum();
        (p2.t - p1.t) - along_axis / self.group_speed
    }

    /// `|gamma(tau)|` for an effective delay `tau`.
    pub fn coherence_magnitude(&self, tau: f64) -> f64 {
        let x = tau / self.coherence_time;
        (-0.5 * PI * x * x).exp()
    }

    /// `gamma(tau)` for an effective delay `tau`. Exactly conjugate-odd:
    /// `gamma(-tau) == conj(gamma(tau))` bit for bit.
    pub fn coherence_at_delay(&self, tau: f64) -> Complex64 {
        let magnitude = self.coherence_magnitude(tau);
        let z = Complex64::from_polar(magnitude, -self.omega0 * tau.abs());
        if tau < 0.0 {
            z.conj()
        } else {
            z
        }
    }

    /// Normalized two-electron correlation `1 - |gamma(tau)|^2` for
    /// coincident detector positions.
    pub fn g2_normalized(&self, tau: f64) -> f64 {
        let x = tau / self.coherence_time;
        1.0 - (-PI * x * x).exp()
    }
}

/// Detector parameters entering `P = G (eta S dt)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDetectorConfig")]
pub struct DetectorConfig {
    pub eta: f64,
    #[serde(rename = "area_m2")]
    pub area: f64,
    #[serde(rename = "bin_width_s")]
    pub bin_width: f64,
}

#[derive(Deserialize)]
struct RawDetectorConfig {
    eta: f64,
    area_m2: f64,
    bin_width_s: f64,
}

impl TryFrom<RawDetectorConfig> for DetectorConfig {
    type Error = Error;

    fn try_from(raw: RawDetectorConfig) -> Result<Self> {
        DetectorConfig::new(raw.eta, raw.area_m2, raw.bin_width_s)
    }
}

impl DetectorConfig {
    pub fn new(eta: f64, area: f64, bin_width: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidDetector(format!("eta must lie in [0, 1], got {eta}")));
        }
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::InvalidDetector(format!("area must be positive, got {area}")));
        }
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidDetector(format!(
                "bin width must be positive, got {bin_width}"
            )));
        }
        Ok(Self { eta, area, bin_width })
    }

    /// `eta * S * dt`.
    pub fn acceptance(&self) -> f64 {
        self.eta * self.area * self.bin_width
    }
}

/// `T_c = h / dE` with `dE` in eV.
pub fn coherence_time_from_bandwidth(delta_e_ev: f64) -> Result<f64> {
    if !delta_e_ev.is_finite() || delta_e_ev <= 0.0 {
        return Err(Error::NonPositiveBandwidth(delta_e_ev));
    }
    Ok(PLANCK_EV_S / delta_e_ev)
}

/// Complex degree of coherence between two detection events.
pub fn degree_of_coherence(model: &SpectralModel, p1: &SpacetimePoint, p2: &SpacetimePoint) -> Complex64 {
    model.coherence_at_delay(model.effective_delay(p1, p2))
}

/// Cross-correlation kernel over a list of points.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBundle {
    /// Empty when the bundle was built directly from a matrix.
    pub points: Vec<SpacetimePoint>,
    /// Unit-diagonal degree-of-coherence matrix.
    pub gamma: HermitianMatrix,
    /// Cross-correlation matrix `Gamma_ij = sqrt(G1_i G1_j) gamma_ij`.
    pub big_gamma: HermitianMatrix,
    /// One-point correlations `G1_i = Gamma_ii`.
    pub singles: Vec<f64>,
}

impl KernelBundle {
    /// Wraps an externally supplied cross-correlation matrix. The matrix must
    /// be positive semidefinite with a strictly positive diagonal.
    pub fn from_cross_correlations(big_gamma: HermitianMatrix) -> Result<Self> {
        let verdict = big_gamma.definiteness()?;
        if !verdict.is_psd() {
            return Err(Error::KernelNotPsd {
                min_eigenvalue: verdict.min_eigenvalue,
            });
        }
        let gamma = big_gamma.unit_diagonal_normalize()?;
        Ok(Self {
            points: Vec::new(),
            singles: big_gamma.diagonal(),
            gamma,
            big_gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.singles.len()
    }
}

/// Builds `gamma` and `Gamma` over `points` and checks that the result is a
/// valid (positive semidefinite) coherence kernel.
pub fn build_kernel(model: &SpectralModel, points: &[SpacetimePoint]) -> Result<KernelBundle> {
    model.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("at least one point is required".into()));
    }
    if points.len() > MAX_KERNEL_POINTS {
        return Err(Error::DimensionTooLarge {
            dim: points.len(),
            max: MAX_KERNEL_POINTS,
        });
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(format!("point {i} has non-finite coordinates")));
    }

    let k = points.len();
    let gamma = HermitianMatrix::from_fn(k, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            degree_of_coherence(model, &points[i], &points[j])
        }
    })?;
    let singles = vec![model.intensity; k];
    let big_gamma = HermitianMatrix::from_fn(k, |i, j| gamma.get(i, j) * (singles[i] * singles[j]).sqrt())?;

    let verdict = big_gamma.definiteness()?;
    if !verdict.is_psd() {
        return Err(Error::KernelNotPsd {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    Ok(KernelBundle {
        points: points.to_vec(),
        gamma,
        big_gamma,
        singles,
    })
}

/// `(tau, 1 - |gamma(tau)|^2)` on `n_points` uniformly spaced delays.
pub fn antibunching_curve(
    model: &SpectralModel,
    tau_min: f64,
    tau_max: f64,
    n_points: usize,
) -> Result<Vec<(f64, f64)>> {
    model.validate()?;
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {n_points}"
        )));
    }
    if !tau_min.is_finite() || !tau_max.is_finite() || tau_min >= tau_max {
        return Err(Error::InvalidArgument(format!(
            "need finite tau_min < tau_max, got [{tau_min}, {tau_max}]"
        )));
    }
    let last = (n_points - 1) as f64;
    Ok((0..n_points)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / last;
            let tau = tau_min * (1.0 - s) + tau_max * s;
            (tau, model.g2_normalized(tau))
        })
        .collect())
}
