use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CenteredRecord, EstimatorError};
use crate::optics::SpectrumModel;
use crate::scan::{Channel, Core};

/// Complex transform amplitudes on a frequency grid (cycles per meter).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub channel: Channel,
    pub core: Core,
    pub seed: u64,
}

impl FourierSpectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Direct nonuniform DFT, `X(f) = Σ x_n·exp(−2πi·f·p_n)`.
pub fn ndft(record: &CenteredRecord, frequencies: &[f64]) -> Result<FourierSpectrum, EstimatorError> {
    let fail = |m: &str| EstimatorError::Ndft(m.to_string());
    if record.positions.is_empty() {
        return Err(fail("empty record"));
    }
    if record.positions.len() != record.values.len() {
        return Err(fail("positions and values differ in length"));
    }
    if record.positions.iter().chain(&record.values).any(|v| !v.is_finite()) {
        return Err(fail("non-finite sample"));
    }
    if frequencies.iter().any(|f| !f.is_finite()) {
        return Err(fail("non-finite frequency"));
    }
    if frequencies.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(fail("frequencies must be strictly increasing"));
    }
    let amplitudes = frequencies
        .par_iter()
        .map(|&f| {
            record
                .positions
                .iter()
                .zip(&record.values)
                .map(|(&p, &x)| Complex64::from_polar(x, -2.0 * PI * f * p))
                .sum()
        })
        .collect();
    Ok(FourierSpectrum {
        frequencies: frequencies.to_vec(),
        amplitudes,
        channel: record.channel,
        core: record.core,
        seed: record.seed,
    })
}

/// Uniform grid `k·Δf` for `k = 0, 1, …` up to `max_frequency`, with
/// `Δf = 1/(oversampling·extent)`.
pub fn frequency_grid(extent: f64, oversampling: f64, max_frequency: f64) -> Result<Vec<f64>, EstimatorError> {
    let fail = |m: String| EstimatorError::Ndft(m);
    if !(extent > 0.0) || !(oversampling > 0.0) || !(max_frequency > 0.0) {
        return Err(fail(format!(
            "grid needs positive extent, oversampling and maximum frequency, got {extent}, {oversampling}, {max_frequency}"
        )));
    }
    let df = 1.0 / (oversampling * extent);
    let n = (max_frequency / df).floor() as usize + 1;
    if n > 50_000_000 {
        return Err(fail(format!("frequency grid of {n} bins is too large")));
    }
    Ok((0..n).map(|k| k as f64 * df).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMode {
    /// Low frequencies carrying the dip; the zero bin is never used.
    QuantumLowpass,
    /// Positive-frequency side peak around the optical carrier.
    ClassicalSideband,
    /// Pump-frequency fringe of the coincidence record (experimental).
    PumpFringe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub mode: BandMode,
    /// Band edges in cycles per meter.
    pub f_lo: f64,
    pub f_hi: f64,
    /// Bins weaker than this fraction of the band peak are dropped.
    pub amplitude_floor: f64,
}

pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 0.1;

impl BandSpec {
    /// `(0, 1.5/FWHM]` for a dip of the given path-length FWHM.
    pub fn quantum_lowpass(dip_fwhm: f64) -> Self {
        Self {
            mode: BandMode::QuantumLowpass,
            f_lo: 0.0,
            f_hi: 1.5 / dip_fwhm,
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
        }
    }

    /// `1/λ ± 2σ_f` around the single-photon carrier.
    pub fn classical_sideband(spectrum: &SpectrumModel) -> Self {
        let center = spectrum.carrier_spatial_frequency();
        let half = 2.0 * spectrum.sigma_spatial_frequency();
        Self {
            mode: BandMode::ClassicalSideband,
            f_lo: center - half,
            f_hi: center + half,
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
        }
    }

    /// Band around the pump-frequency fringe of the coincidence record
    /// (`2/λ ± 2σ_f`). Experimental; not used by the default pipeline.
    pub fn pump_fringe(spectrum: &SpectrumModel) -> Self {
        let center = 2.0 * spectrum.carrier_spatial_frequency();
        let half = 2.0 * spectrum.sigma_spatial_frequency();
        Self {
            mode: BandMode::PumpFringe,
            f_lo: center - half,
            f_hi: center + half,
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.f_lo >= 0.0 && self.f_hi > self.f_lo) || !self.f_hi.is_finite() {
            return Err(EstimatorError::BandSelect(format!(
                "band edges must satisfy 0 <= f_lo < f_hi, got [{}, {}]",
                self.f_lo, self.f_hi
            )));
        }
        if !(0.0..1.0).contains(&self.amplitude_floor) {
            return Err(EstimatorError::BandSelect(format!(
                "amplitude floor must lie in [0, 1), got {}",
                self.amplitude_floor
            )));
        }
        Ok(())
    }

    pub fn contains(&self, f: f64) -> bool {
        let above_zero = self.mode != BandMode::QuantumLowpass || f > 0.0;
        above_zero && f >= self.f_lo && f <= self.f_hi
    }
}

/// Fewest bins a band may keep.
pub const MIN_BAND_BINS: usize = 5;

/// Keeps the in-band bins whose magnitude reaches the amplitude floor.
pub fn band_select(spectrum: &FourierSpectrum, band: &BandSpec) -> Result<FourierSpectrum, EstimatorError> {
    band.validate()?;
    let in_band: Vec<usize> = (0..spectrum.len())
        .filter(|&i| band.contains(spectrum.frequencies[i]))
        .collect();
    let peak = in_band
        .iter()
        .map(|&i| spectrum.amplitudes[i].norm())
        .fold(0.0, f64::max);
    let keep: Vec<usize> = in_band
        .into_iter()
        .filter(|&i| peak > 0.0 && spectrum.amplitudes[i].norm() >= band.amplitude_floor * peak)
        .collect();
    if keep.len() < MIN_BAND_BINS {
        return Err(EstimatorError::BandSelect(format!(
            "{} bins survive in [{:e}, {:e}] /m, need {MIN_BAND_BINS}",
            keep.len(),
            band.f_lo,
            band.f_hi
        )));
    }
    Ok(FourierSpectrum {
        frequencies: keep.iter().map(|&i| spectrum.frequencies[i]).collect(),
        amplitudes: keep.iter().map(|&i| spectrum.amplitudes[i]).collect(),
        channel: spectrum.channel,
        core: spectrum.core,
        seed: spectrum.seed,
    })
}
