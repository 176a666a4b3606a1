//! Run configuration read from TOML.
//!
//! Every key carries its unit in the name (`_m`, `_s`, `_hz`, `_per_m`,
//! `_s2`, ...). Unknown keys are rejected. Sections left out of a file take
//! the reference values, which are also written out in `configs/default.toml`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qoct_core::bench::Experiment;
use qoct_core::estimator::{BandMode, BandSpec, EstimatorTuning, FitWeighting, Mode};
use qoct_core::optics::{
    dip_fwhm_closed_form, ClassicalCurveModel, DispersionProfile, FringeEnvelope, QuadratureSpec, QuantumCurveModel,
    SpectrumModel, REFERENCE_BETA2_L, REFERENCE_BETA3_L,
};
use qoct_core::scan::{build_scan_plan, DualCoreScenario, NoiseConfig, DEFAULT_SINGLES_PEAK_RATE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub root_seed: u64,
    pub output_dir: PathBuf,
    pub spectrum: SpectrumSection,
    pub dispersion: DispersionSection,
    pub quantum: QuantumSection,
    pub classical: ClassicalSection,
    pub scan: ScanSection,
    pub noise: NoiseSection,
    pub scenario: ScenarioSection,
    pub estimator: EstimatorSection,
    pub bench: BenchSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub center_wavelength_m: f64,
    pub fwhm_wavelength_m: f64,
}

/// Sample dispersion as length products β_k·L; the length itself is
/// `scenario.sample_length_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSection {
    pub beta2_l_s2: f64,
    pub beta3_l_s3: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub higher_orders: Vec<HigherOrder>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HigherOrder {
    pub order: u32,
    /// β_k·L in s^k.
    pub length_product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumSection {
    pub dip_visibility: f64,
    pub fringe_visibility: f64,
    pub fringe_envelope: FringeEnvelope,
    /// Defaults to twice the spectrum center frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_angular_frequency_rad_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalSection {
    pub visibility: f64,
    /// Defaults to the spectrum center frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_angular_frequency_rad_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub center_m: f64,
    pub span_m: f64,
    pub step_m: f64,
    pub integration_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub position_jitter_m: f64,
    pub singles_peak_rate_hz: f64,
    pub coincidence_to_singles_ratio: f64,
    pub estimator_sees_true_positions: bool,
    pub shot_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub delta_tau_true_m: f64,
    pub sample_length_m: f64,
    pub sample_length_uncertainty_m: f64,
    pub drift_per_scan_m: f64,
    /// Defaults to the scan center shifted by `delta_tau_true_m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core2_scan_center_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub quantum: TuningOverrides,
    pub classical: TuningOverrides,
}

/// Changes to the default tuning of one mode; unset keys keep the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<BandMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_lo_per_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_hi_per_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusion_halfwidth_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing_width_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nyquist_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<FitWeighting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demodulate: Option<bool>,
}

impl TuningOverrides {
    pub fn apply(&self, mut t: EstimatorTuning, spectrum: &SpectrumModel) -> EstimatorTuning {
        match self.band {
            Some(BandMode::QuantumLowpass) => t.band = BandSpec::quantum_lowpass(dip_fwhm_closed_form(spectrum)),
            Some(BandMode::ClassicalSideband) => t.band = BandSpec::classical_sideband(spectrum),
            Some(BandMode::PumpFringe) => t.band = BandSpec::pump_fringe(spectrum),
            None => {}
        }
        let floor = t.band.amplitude_floor;
        t.band.amplitude_floor = self.amplitude_floor.unwrap_or(floor);
        t.band.f_lo = self.band_lo_per_m.unwrap_or(t.band.f_lo);
        t.band.f_hi = self.band_hi_per_m.unwrap_or(t.band.f_hi);
        t.exclusion_halfwidth = self.exclusion_halfwidth_m.unwrap_or(t.exclusion_halfwidth);
        t.smoothing_width = self.smoothing_width_m.unwrap_or(t.smoothing_width);
        t.oversampling = self.oversampling.unwrap_or(t.oversampling);
        t.nyquist_fraction = self.nyquist_fraction.unwrap_or(t.nyquist_fraction);
        t.weighting = self.weighting.unwrap_or(t.weighting);
        t.demodulate = self.demodulate.unwrap_or(t.demodulate);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub trials: usize,
    pub histogram_bins: usize,
    /// A benchmark with more failed trials than this fraction fails.
    pub max_failure_fraction: f64,
    pub sweep_trials: usize,
    pub sweep_points: Vec<usize>,
    pub sweep_beta2_l_s2: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            root_seed: 20_240_611,
            output_dir: PathBuf::from("out"),
            spectrum: SpectrumSection::default(),
            dispersion: DispersionSection::default(),
            quantum: QuantumSection::default(),
            classical: ClassicalSection::default(),
            scan: ScanSection::default(),
            noise: NoiseSection::default(),
            scenario: ScenarioSection::default(),
            estimator: EstimatorSection::default(),
            bench: BenchSection::default(),
        }
    }
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            center_wavelength_m: 1560e-9,
            fwhm_wavelength_m: 44e-9,
        }
    }
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            beta2_l_s2: REFERENCE_BETA2_L,
            beta3_l_s3: REFERENCE_BETA3_L,
            higher_orders: Vec::new(),
        }
    }
}

impl Default for QuantumSection {
    fn default() -> Self {
        Self {
            dip_visibility: 0.74,
            fringe_visibility: 1.0,
            fringe_envelope: FringeEnvelope::Flat,
            pump_angular_frequency_rad_s: None,
        }
    }
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            visibility: 0.5,
            carrier_angular_frequency_rad_s: None,
        }
    }
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            center_m: 0.0,
            span_m: 120e-6,
            step_m: 0.24e-6,
            integration_time_s: 0.5,
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        Self {
            position_jitter_m: n.position_jitter_sigma,
            singles_peak_rate_hz: DEFAULT_SINGLES_PEAK_RATE,
            coincidence_to_singles_ratio: n.coincidence_to_singles_ratio,
            estimator_sees_true_positions: n.estimator_sees_true_positions,
            shot_noise: n.shot_noise,
        }
    }
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            delta_tau_true_m: 41.1e-6,
            sample_length_m: 0.5,
            sample_length_uncertainty_m: 1e-4,
            drift_per_scan_m: 0.0,
            core2_scan_center_m: None,
        }
    }
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            trials: 70,
            histogram_bins: 20,
            max_failure_fraction: 0.05,
            sweep_trials: 100,
            sweep_points: vec![2000, 1000, 500, 250, 100],
            // Quarter steps of the reference value, up to 1.5 times it.
            sweep_beta2_l_s2: vec![
                0.0,
                3.15785104501e-27,
                6.31570209002e-27,
                9.47355313503e-27,
                REFERENCE_BETA2_L,
                1.578925522505e-26,
                1.894710627006e-26,
            ],
        }
    }
}

/// Configuration problem, pointing at the offending line when it is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}: {}", self.path.display(), self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration together with the text it came from, so that
/// semantic errors can be traced back to a line.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub path: PathBuf,
    source: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: None,
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(path, source)
    }

    pub fn parse(path: &Path, source: String) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(&source).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: e.span().map(|s| line_of_offset(&source, s.start)),
            message: e.message().to_string(),
        })?;
        Ok(Self {
            config,
            path: path.to_path_buf(),
            source,
        })
    }

    /// Built-in reference configuration.
    pub fn builtin() -> Self {
        Self {
            config: RunConfig::default(),
            path: PathBuf::from("<built-in>"),
            source: String::new(),
        }
    }

    fn error(&self, key: &str, message: impl fmt::Display) -> ConfigError {
        ConfigError {
            path: self.path.clone(),
            line: locate(&self.source, key),
            message: format!("{key}: {message}"),
        }
    }

    /// Builds and validates the experiment described by the file.
    pub fn experiment(&self) -> Result<Experiment, ConfigError> {
        let c = &self.config;
        let sc = &c.scenario;
        let scenario = DualCoreScenario {
            delta_tau_true: sc.delta_tau_true_m,
            sample_length: sc.sample_length_m,
            sample_length_uncertainty: sc.sample_length_uncertainty_m,
            drift_per_scan: sc.drift_per_scan_m,
            core2_scan_center: sc.core2_scan_center_m,
        };
        scenario.validate().map_err(|e| self.error("scenario", e))?;

        let spectrum = SpectrumModel::new(c.spectrum.center_wavelength_m, c.spectrum.fwhm_wavelength_m)
            .map_err(|e| self.error("spectrum", e))?;

        let mut products = vec![(2, c.dispersion.beta2_l_s2), (3, c.dispersion.beta3_l_s3)];
        products.extend(c.dispersion.higher_orders.iter().map(|h| (h.order, h.length_product)));
        let dispersion = DispersionProfile::from_length_products(c.scenario.sample_length_m, &products)
            .map_err(|e| self.error("dispersion", e))?;

        let q = &c.quantum;
        let mut quantum = QuantumCurveModel::new(spectrum, 1.0, q.dip_visibility, q.fringe_visibility, dispersion.clone())
            .map_err(|e| self.error("quantum", e))?;
        quantum.fringe_envelope = q.fringe_envelope;
        if let Some(w) = q.pump_angular_frequency_rad_s {
            quantum.pump_angular_frequency = w;
        }
        quantum.validate().map_err(|e| self.error("quantum", e))?;

        let mut classical = ClassicalCurveModel::new(spectrum, 1.0, c.classical.visibility, dispersion)
            .map_err(|e| self.error("classical", e))?;
        if let Some(w) = c.classical.carrier_angular_frequency_rad_s {
            classical.carrier_angular_frequency = w;
        }
        classical.validate().map_err(|e| self.error("classical", e))?;

        let s = &c.scan;
        let plan = build_scan_plan(s.center_m, s.span_m, s.step_m, s.integration_time_s)
            .map_err(|e| self.error("scan", e))?;

        let n = &c.noise;
        let noise = NoiseConfig {
            position_jitter_sigma: n.position_jitter_m,
            singles_peak_rate: n.singles_peak_rate_hz,
            coincidence_to_singles_ratio: n.coincidence_to_singles_ratio,
            estimator_sees_true_positions: n.estimator_sees_true_positions,
            shot_noise: n.shot_noise,
        };
        noise.validate().map_err(|e| self.error("noise", e))?;

        let quantum_tuning = self.tuning(Mode::Quantum, &spectrum)?;
        let classical_tuning = self.tuning(Mode::Classical, &spectrum)?;

        let b = &c.bench;
        if b.trials < 2 {
            return Err(self.error("bench.trials", "need at least 2 trials"));
        }
        if b.sweep_trials < 2 {
            return Err(self.error("bench.sweep_trials", "need at least 2 trials"));
        }
        if b.histogram_bins == 0 {
            return Err(self.error("bench.histogram_bins", "need at least one bin"));
        }
        if !(0.0..=1.0).contains(&b.max_failure_fraction) {
            return Err(self.error("bench.max_failure_fraction", "must lie in [0, 1]"));
        }

        Ok(Experiment {
            quantum,
            classical,
            plan,
            noise,
            scenario,
            quantum_tuning,
            classical_tuning,
            quadrature: QuadratureSpec::default(),
        })
    }

    /// Default tuning of the mode with the file's overrides applied.
    pub fn tuning(&self, mode: Mode, spectrum: &SpectrumModel) -> Result<EstimatorTuning, ConfigError> {
        let overrides = match mode {
            Mode::Quantum => &self.config.estimator.quantum,
            Mode::Classical => &self.config.estimator.classical,
        };
        let t = overrides.apply(EstimatorTuning::for_mode(mode, spectrum), spectrum);
        t.validate().map_err(|e| self.error(&format!("estimator.{mode}"), e))?;
        Ok(t)
    }
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run configuration serializes to TOML")
    }
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of `a.b.key` (or of the `[a.b]` header when only a section is
/// given) in a TOML document; `None` when the text does not mention it.
fn locate(source: &str, key: &str) -> Option<usize> {
    let (section, leaf) = match key.rsplit_once('.') {
        Some((s, l)) => (s, Some(l)),
        None => (key, None),
    };
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == key {
                header = Some(i + 1);
            }
            continue;
        }
        if let Some(leaf) = leaf {
            let starts = line
                .strip_prefix(leaf)
                .is_some_and(|rest| rest.trim_start().starts_with('='));
            if current == section && starts {
                return Some(i + 1);
            }
        }
    }
    header
}
