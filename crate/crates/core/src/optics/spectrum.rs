use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::ModelError;

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ratio between the FWHM and the standard deviation of a Gaussian.
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4; // 2*sqrt(2 ln 2)

/// Converts a wavelength FWHM into the angular-frequency standard deviation
/// of the Gaussian spectral density.
///
/// Uses `dω = 2πc·dλ/λ²` and `FWHM = 2√(2 ln 2)·σ`.
pub fn sigma_from_fwhm(center_wavelength: f64, fwhm_wavelength: f64) -> Result<f64, ModelError> {
    if !(center_wavelength > 0.0) || !center_wavelength.is_finite() {
        return Err(ModelError::Domain(format!(
            "center wavelength must be positive, got {center_wavelength}"
        )));
    }
    if !(fwhm_wavelength > 0.0) || !fwhm_wavelength.is_finite() {
        return Err(ModelError::Domain(format!(
            "wavelength FWHM must be positive, got {fwhm_wavelength}"
        )));
    }
    let fwhm_omega = 2.0 * PI * SPEED_OF_LIGHT * fwhm_wavelength / (center_wavelength * center_wavelength);
    Ok(fwhm_omega / GAUSSIAN_FWHM_PER_SIGMA)
}

/// Gaussian spectral density |g(ω)|² of the down-converted photons, centered
/// at half the pump frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    center_wavelength: f64,
    fwhm_wavelength: f64,
    sigma_omega: f64,
}

impl SpectrumModel {
    pub fn new(center_wavelength: f64, fwhm_wavelength: f64) -> Result<Self, ModelError> {
        let sigma_omega = sigma_from_fwhm(center_wavelength, fwhm_wavelength)?;
        Ok(Self {
            center_wavelength,
            fwhm_wavelength,
            sigma_omega,
        })
    }

    pub fn center_wavelength(&self) -> f64 {
        self.center_wavelength
    }

    pub fn fwhm_wavelength(&self) -> f64 {
        self.fwhm_wavelength
    }

    /// Standard deviation of the spectral density in rad/s.
    pub fn sigma_omega(&self) -> f64 {
        self.sigma_omega
    }

    /// Angular frequency of the spectrum center (ω_p/2).
    pub fn center_angular_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.center_wavelength
    }

    /// Pump angular frequency, twice the center of the degenerate spectrum.
    pub fn pump_angular_frequency(&self) -> f64 {
        2.0 * self.center_angular_frequency()
    }

    /// Carrier of a single-photon interferogram in cycles per meter of path.
    pub fn carrier_spatial_frequency(&self) -> f64 {
        1.0 / self.center_wavelength
    }

    /// Standard deviation of the spectrum expressed in cycles per meter of path.
    pub fn sigma_spatial_frequency(&self) -> f64 {
        self.sigma_omega / (2.0 * PI * SPEED_OF_LIGHT)
    }

    /// Analytic normalized density at detuning `omega` (rad/s) from the center.
    pub fn density(&self, detuning: f64) -> f64 {
        let s = self.sigma_omega;
        (-(detuning * detuning) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())
    }

    /// Uniform trapezoid grid over `±half_range_sigmas·σ` with `nodes` points.
    ///
    /// Weights are the trapezoid weights times the density, renormalized so
    /// they sum to one on this grid.
    pub fn grid(&self, half_range_sigmas: f64, nodes: usize) -> SpectralGrid {
        assert!(nodes >= 3, "spectral grid needs at least three nodes");
        let half = half_range_sigmas * self.sigma_omega;
        let h = 2.0 * half / (nodes - 1) as f64;
        let detunings: Vec<f64> = (0..nodes).map(|j| -half + j as f64 * h).collect();
        let mut weights: Vec<f64> = detunings
            .iter()
            .enumerate()
            .map(|(j, &w)| {
                let end = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
                end * h * self.density(w)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        SpectralGrid {
            detunings,
            weights,
            step: h,
        }
    }
}

/// Quadrature nodes (detunings from the spectrum center) and normalized
/// density weights.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
    pub step: f64,
}

impl SpectralGrid {
    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}
