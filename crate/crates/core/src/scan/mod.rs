//! Turning ideal curves into noisy scan records.
//!
//! Random streams: every core pair is simulated from a single `u64` seed.
//! Core 1 draws from ChaCha8 stream 0 and core 2 from stream 1; within a
//! stream the jitter for all points is drawn first, then singles counts,
//! then coincidence counts. Trial seeds come from [`derive_seed`], so a
//! trial's records never depend on which thread produced them.

mod plan;
mod record;
mod simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optics::{ModelError, PreparedClassical, PreparedQuantum, RateCurve};

pub use plan::{build_scan_plan, ScanPlan};
pub use record::{quantize_position, Channel, Core, RecordError, ScanRecord};
pub use simulate::{
    simulate_core_pair, simulate_scan, ChannelRecords, CoreCurves, CorePairRecords, DualCoreScenario,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScanError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("could not draw an ordered jittered position near {position:e} m")]
    Ordering { position: f64 },
    #[error("internal error: negative or non-finite expected counts {0}")]
    NegativeRate(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Measurement imperfections applied on top of the ideal curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation of the stage position about its commanded value (m).
    pub position_jitter_sigma: f64,
    /// Highest expected single-photon rate inside the scan window (1/s).
    pub singles_peak_rate: f64,
    /// Peak coincidence rate over peak singles rate.
    pub coincidence_to_singles_ratio: f64,
    /// Record the jittered positions (encoder readout) rather than the
    /// commanded ones.
    pub estimator_sees_true_positions: bool,
    /// Poisson sampling of the counts; when off, counts are the rounded means.
    pub shot_noise: bool,
}

/// Singles peak rate used when none is configured (1/s).
///
/// With coincidences at 1/100 of the singles, the relative shot noise per
/// point is ten times larger in the coincidence record at any rate, so the
/// absolute value is a free choice. It was fixed by a Monte-Carlo sweep of
/// the point count at constant total scan time (20 nm jitter, 120 µm span):
/// at this rate 500 points are as good as 2000 and clearly better than 100.
/// Higher rates leave the jitter floor dominant and favour dense scans.
pub const DEFAULT_SINGLES_PEAK_RATE: f64 = 5.0e4;

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            position_jitter_sigma: 20e-9,
            singles_peak_rate: DEFAULT_SINGLES_PEAK_RATE,
            coincidence_to_singles_ratio: 0.01,
            estimator_sees_true_positions: true,
            shot_noise: true,
        }
    }
}

impl NoiseConfig {
    /// No jitter and no shot noise.
    pub fn noiseless(singles_peak_rate: f64) -> Self {
        Self {
            position_jitter_sigma: 0.0,
            singles_peak_rate,
            shot_noise: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if !(self.position_jitter_sigma >= 0.0) || !self.position_jitter_sigma.is_finite() {
            return Err(ScanError::Domain(format!(
                "position jitter must be non-negative, got {}",
                self.position_jitter_sigma
            )));
        }
        if !(self.singles_peak_rate > 0.0) || !self.singles_peak_rate.is_finite() {
            return Err(ScanError::Domain(format!(
                "singles peak rate must be positive, got {}",
                self.singles_peak_rate
            )));
        }
        if !(self.coincidence_to_singles_ratio > 0.0 && self.coincidence_to_singles_ratio <= 1.0) {
            return Err(ScanError::Domain(format!(
                "coincidence/singles ratio must lie in (0, 1], got {}",
                self.coincidence_to_singles_ratio
            )));
        }
        Ok(())
    }
}

/// Rescales both curves so that, over the plan window, the classical peak
/// equals `singles_peak_rate` and the quantum peak equals
/// `coincidence_to_singles_ratio` times that.
pub fn calibrate_rates(
    quantum: &PreparedQuantum,
    classical: &PreparedClassical,
    noise: &NoiseConfig,
    plan: &ScanPlan,
) -> Result<(PreparedQuantum, PreparedClassical), ScanError> {
    noise.validate()?;
    plan.validate()?;
    let q = quantum.with_baseline_rate(1.0);
    let c = classical.with_mean_intensity(1.0);
    let (lo, hi) = plan.window();
    let step = (plan.step / 10.0).min(10e-9);
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let peak = |curve: &dyn RateCurve| {
        (0..n)
            .map(|i| curve.rate(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .fold(0.0, f64::max)
    };
    let peak_q = peak(&q);
    let peak_c = peak(&c);
    if !(peak_q > 0.0 && peak_c > 0.0) {
        return Err(ScanError::Domain("curve has no positive rate inside the window".into()));
    }
    let singles = noise.singles_peak_rate;
    let coincidences = singles * noise.coincidence_to_singles_ratio;
    Ok((q.with_baseline_rate(coincidences / peak_q), c.with_mean_intensity(singles / peak_c)))
}

/// Seed of item `index` derived from a root seed (SplitMix64 of
/// `root + (index + 1)·φ`).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
