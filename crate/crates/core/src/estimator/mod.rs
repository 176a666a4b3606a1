//! Fourier-phase estimation of the optical-path offset between two cores.
//!
//! The pipeline is `preprocess → ndft → band_select → differential_phase_fit`.
//! Each record's baseline is removed, both are transformed on a shared grid,
//! and the slope of the unwrapped cross-spectrum phase gives the offset.
//! Any phase that both cores share (an asymmetric interferogram, dispersion,
//! the carrier phase) drops out of `X₂·conj(X₁)`.

mod fit;
mod fourier;
mod preprocess;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optics::{dip_fwhm_closed_form, SpectrumModel};
use crate::scan::{Channel, ScanRecord};

pub use fit::{differential_phase_fit, unwrap, FitWeighting};
pub use fourier::{
    band_select, frequency_grid, ndft, BandMode, BandSpec, FourierSpectrum, DEFAULT_AMPLITUDE_FLOOR,
    MIN_BAND_BINS,
};
pub use preprocess::{preprocess, CenteredRecord, MIN_BASELINE_POINTS};

/// Estimation failure, tagged with the stage that raised it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EstimatorError {
    #[error("input: {0}")]
    Input(String),
    #[error("preprocess: {0}")]
    Preprocess(String),
    #[error("ndft: {0}")]
    Ndft(String),
    #[error("band_select: {0}")]
    BandSelect(String),
    #[error("phase_fit: {0}")]
    PhaseFit(String),
}

impl EstimatorError {
    pub fn stage(&self) -> &'static str {
        match self {
            EstimatorError::Input(_) => "input",
            EstimatorError::Preprocess(_) => "preprocess",
            EstimatorError::Ndft(_) => "ndft",
            EstimatorError::BandSelect(_) => "band_select",
            EstimatorError::PhaseFit(_) => "phase_fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Quantum,
    Classical,
}

impl Mode {
    /// Record channel each mode works on.
    pub fn channel(self) -> Channel {
        match self {
            Mode::Quantum => Channel::Coincidences,
            Mode::Classical => Channel::Singles,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Quantum => "quantum",
            Mode::Classical => "classical",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quantum" => Ok(Mode::Quantum),
            "classical" => Ok(Mode::Classical),
            other => Err(format!("unknown mode '{other}' (expected quantum or classical)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Bins entering the fit.
    pub bins: usize,
    /// Weighted RMS of the phase residuals (rad).
    pub residual_rms: f64,
    pub unwrap_jumps: usize,
    /// Fitted phase at zero frequency (rad).
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTauEstimate {
    /// Core-2 minus core-1 optical path (m).
    pub delta_tau: f64,
    pub standard_error: f64,
    pub mode: Option<Mode>,
    pub band: Option<BandSpec>,
    pub diagnostics: Diagnostics,
}

/// On-disk form of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateJson {
    pub delta_tau_m: f64,
    pub std_err_m: f64,
    pub mode: Option<Mode>,
    pub band: Option<BandSpec>,
    pub diagnostics: Diagnostics,
}

impl DeltaTauEstimate {
    pub fn to_json(&self) -> EstimateJson {
        EstimateJson {
            delta_tau_m: self.delta_tau,
            std_err_m: self.standard_error,
            mode: self.mode,
            band: self.band,
            diagnostics: self.diagnostics,
        }
    }
}

/// Settings of the full pipeline for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorTuning {
    pub mode: Mode,
    /// Points within this distance of the coarse center are left out of the
    /// baseline mean; zero uses every point.
    pub exclusion_halfwidth: f64,
    /// Window of the moving average used to locate the interferogram.
    pub smoothing_width: f64,
    pub band: BandSpec,
    /// Grid spacing is `1/(oversampling·extent)`.
    pub oversampling: f64,
    /// Grid top as a multiple of the Nyquist frequency of the mean step.
    pub nyquist_fraction: f64,
    pub weighting: FitWeighting,
    /// Remove the coarse-center offset from the cross spectrum before
    /// unwrapping.
    pub demodulate: bool,
}

impl EstimatorTuning {
    /// Dip band `(0, 1.5/FWHM]`; baseline taken beyond one FWHM of the dip.
    pub fn quantum(spectrum: &SpectrumModel) -> Self {
        let fwhm = dip_fwhm_closed_form(spectrum);
        Self {
            mode: Mode::Quantum,
            exclusion_halfwidth: fwhm,
            smoothing_width: fwhm,
            band: BandSpec::quantum_lowpass(fwhm),
            oversampling: 4.0,
            nyquist_fraction: 1.2,
            weighting: FitWeighting::Magnitude,
            demodulate: true,
        }
    }

    /// Carrier side peak `1/λ ± 2σ_f`; baseline is the mean of the whole
    /// record, since the fringe packet averages to zero over the scan.
    pub fn classical(spectrum: &SpectrumModel) -> Self {
        Self {
            mode: Mode::Classical,
            exclusion_halfwidth: 0.0,
            smoothing_width: dip_fwhm_closed_form(spectrum),
            band: BandSpec::classical_sideband(spectrum),
            oversampling: 4.0,
            nyquist_fraction: 1.2,
            weighting: FitWeighting::Magnitude,
            demodulate: true,
        }
    }

    pub fn for_mode(mode: Mode, spectrum: &SpectrumModel) -> Self {
        match mode {
            Mode::Quantum => Self::quantum(spectrum),
            Mode::Classical => Self::classical(spectrum),
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        self.band.validate()?;
        let allowed = match (self.mode, self.band.mode) {
            (Mode::Quantum, m) => m != BandMode::ClassicalSideband,
            (Mode::Classical, m) => m == BandMode::ClassicalSideband,
        };
        if !allowed {
            return Err(EstimatorError::Input(format!(
                "a {:?} band cannot be used for {} estimation",
                self.band.mode, self.mode
            )));
        }
        if !(self.oversampling >= 1.0) || !(self.nyquist_fraction > 0.0) {
            return Err(EstimatorError::Input(
                "oversampling must be >= 1 and the Nyquist fraction positive".into(),
            ));
        }
        Ok(())
    }
}

/// Runs the full pipeline on one pair of records.
///
/// Both records are transformed on the same grid, built from the larger
/// extent and the larger mean step of the two, so swapping the records
/// exactly negates the result.
pub fn estimate_delta_tau(
    record1: &ScanRecord,
    record2: &ScanRecord,
    tuning: &EstimatorTuning,
) -> Result<DeltaTauEstimate, EstimatorError> {
    tuning.validate()?;
    let wanted = tuning.mode.channel();
    for r in [record1, record2] {
        if r.channel != wanted {
            return Err(EstimatorError::Input(format!(
                "{} estimation needs {wanted} records, got {}",
                tuning.mode, r.channel
            )));
        }
        if r.len() < 2 {
            return Err(EstimatorError::Input("records need at least two points".into()));
        }
    }

    let c1 = preprocess(record1, tuning.exclusion_halfwidth, tuning.smoothing_width)?;
    let c2 = preprocess(record2, tuning.exclusion_halfwidth, tuning.smoothing_width)?;

    let extent = |r: &ScanRecord| r.positions[r.len() - 1] - r.positions[0];
    let mean_step = |r: &ScanRecord| extent(r) / (r.len() - 1) as f64;
    let span = extent(record1).max(extent(record2));
    let step = mean_step(record1).max(mean_step(record2));
    let nyquist = 0.5 / step;
    let grid = frequency_grid(span, tuning.oversampling, tuning.nyquist_fraction * nyquist)?;
    // Bins outside the band never reach the fit; skip transforming them.
    let grid: Vec<f64> = grid.into_iter().filter(|&f| tuning.band.contains(f)).collect();

    let s1 = band_select(&ndft(&c1, &grid)?, &tuning.band)?;
    let s2 = band_select(&ndft(&c2, &grid)?, &tuning.band)?;
    let prior = if tuning.demodulate {
        c2.coarse_center - c1.coarse_center
    } else {
        0.0
    };
    let mut estimate = differential_phase_fit(&s1, &s2, tuning.weighting, tuning.oversampling, prior)?;
    estimate.mode = Some(tuning.mode);
    estimate.band = Some(tuning.band);
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaN {
    pub delta_n: f64,
    pub sigma: f64,
}

/// `Δn = Δτ/L`, with the delay error and the length error added in quadrature.
pub fn delta_n(
    delta_tau: f64,
    delta_tau_sigma: f64,
    length: f64,
    length_sigma: f64,
) -> Result<DeltaN, EstimatorError> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(EstimatorError::Input(format!("sample length must be positive, got {length}")));
    }
    if !(delta_tau_sigma >= 0.0) || !(length_sigma >= 0.0) {
        return Err(EstimatorError::Input("uncertainties must be non-negative".into()));
    }
    let dn = delta_tau / length;
    let sigma = (delta_tau_sigma / length).hypot(dn * length_sigma / length);
    Ok(DeltaN { delta_n: dn, sigma })
}

impl DeltaTauEstimate {
    pub fn delta_n(&self, length: f64, length_sigma: f64) -> Result<DeltaN, EstimatorError> {
        delta_n(self.delta_tau, self.standard_error, length, length_sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refractive_index_difference() {
        let d = delta_n(40.7e-6, 0.0, 0.5, 0.0).unwrap();
        assert!((d.delta_n - 8.14e-5).abs() < 1e-18);
        let d = delta_n(0.0, 1.2e-6, 0.5, 0.0).unwrap();
        assert!((d.sigma - 2.4e-6).abs() < 1e-18);
        let d = delta_n(0.0, 0.3e-6, 0.5, 0.0).unwrap();
        assert!((d.sigma - 6e-7).abs() < 1e-18);
        let d = delta_n(41.1e-6, 0.3e-6, 0.5, 1e-4).unwrap();
        let expect = (6e-7f64.powi(2) + (8.22e-5 * 2e-4f64).powi(2)).sqrt();
        assert!((d.sigma - expect).abs() < 1e-15);
        assert!(delta_n(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(delta_n(1.0, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn mode_round_trips_through_text() {
        for m in [Mode::Quantum, Mode::Classical] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("both".parse::<Mode>().is_err());
    }
}
