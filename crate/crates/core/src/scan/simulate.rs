use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::record::{quantize_position, Channel, Core, ScanRecord};
use super::{NoiseConfig, ScanError, ScanPlan};
use crate::optics::RateCurve;

const MAX_REDRAWS: usize = 1000;

/// Two cores of the same sample with an optical-path offset between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualCoreScenario {
    /// Core-2 minus core-1 optical path, in meters.
    pub delta_tau_true: f64,
    pub sample_length: f64,
    pub sample_length_uncertainty: f64,
    /// Unobserved path drift accumulated over one scan, in meters. Core 1 is
    /// scanned first, so core 2 starts one full scan of drift later.
    pub drift_per_scan: f64,
    /// Center of the core-2 scan window; defaults to the plan center shifted
    /// by `delta_tau_true` (a perfect prior).
    pub core2_scan_center: Option<f64>,
}

impl DualCoreScenario {
    pub fn new(delta_tau_true: f64, sample_length: f64) -> Result<Self, ScanError> {
        let s = Self {
            delta_tau_true,
            sample_length,
            sample_length_uncertainty: 0.0,
            drift_per_scan: 0.0,
            core2_scan_center: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        if !(self.sample_length > 0.0) || !self.sample_length.is_finite() {
            return Err(ScanError::Domain(format!(
                "sample length must be positive, got {}",
                self.sample_length
            )));
        }
        if !(self.sample_length_uncertainty >= 0.0) {
            return Err(ScanError::Domain("length uncertainty must be non-negative".into()));
        }
        if !self.delta_tau_true.is_finite() || !self.drift_per_scan.is_finite() {
            return Err(ScanError::Domain("offset and drift must be finite".into()));
        }
        Ok(())
    }

    pub fn core2_center(&self, plan: &ScanPlan) -> f64 {
        self.core2_scan_center
            .unwrap_or(plan.center_position + self.delta_tau_true)
    }
}

/// Singles and coincidences recorded in the same pass over one core.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRecords {
    pub singles: ScanRecord,
    pub coincidences: ScanRecord,
}

impl ChannelRecords {
    pub fn get(&self, channel: Channel) -> &ScanRecord {
        match channel {
            Channel::Singles => &self.singles,
            Channel::Coincidences => &self.coincidences,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorePairRecords {
    pub core1: ChannelRecords,
    pub core2: ChannelRecords,
    /// Set when the true core-2 zero delay falls outside its scan window.
    pub dip_outside_window: bool,
}

/// Rate curves of the two channels for one core.
#[derive(Clone, Copy)]
pub struct CoreCurves<'a> {
    pub singles: &'a dyn RateCurve,
    pub coincidences: &'a dyn RateCurve,
}

/// Simulates a single record from one rate curve.
///
/// Uses RNG stream `core.index()` of a ChaCha8 generator seeded with `seed`.
pub fn simulate_scan(
    curve: &dyn RateCurve,
    plan: &ScanPlan,
    noise: &NoiseConfig,
    seed: u64,
    channel: Channel,
    core: Core,
) -> Result<ScanRecord, ScanError> {
    let mut records = simulate_pass(&[(channel, curve)], plan, noise, seed, core, |_, p| p)?;
    Ok(records.pop().expect("one channel"))
}

/// Simulates both cores and both channels.
///
/// Core 2 sees the core-1 curves translated by `delta_tau_true`; the scan
/// drift enters as a hidden offset of the curve argument.
pub fn simulate_core_pair(
    scenario: &DualCoreScenario,
    curves: CoreCurves<'_>,
    plan: &ScanPlan,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<CorePairRecords, ScanError> {
    scenario.validate()?;
    let n = plan.point_count();
    let drift = |scan: f64, i: usize| scenario.drift_per_scan * (scan + i as f64 / (n - 1) as f64);
    let channels = [
        (Channel::Singles, curves.singles),
        (Channel::Coincidences, curves.coincidences),
    ];

    let mut core1 = simulate_pass(&channels, plan, noise, seed, Core::Core1, |i, p| p - drift(0.0, i))?;
    let plan2 = plan.with_center(scenario.core2_center(plan));
    let mut core2 = simulate_pass(&channels, &plan2, noise, seed, Core::Core2, |i, p| {
        p - scenario.delta_tau_true - drift(1.0, i)
    })?;

    let (lo, hi) = plan2.window();
    let zero = plan.center_position + scenario.delta_tau_true;
    let dip_outside_window = zero < lo || zero > hi;

    let take = |v: &mut Vec<ScanRecord>| {
        let c = v.pop().expect("coincidences");
        let s = v.pop().expect("singles");
        ChannelRecords {
            singles: s,
            coincidences: c,
        }
    };
    Ok(CorePairRecords {
        core1: take(&mut core1),
        core2: take(&mut core2),
        dip_outside_window,
    })
}

/// One pass of the stage: jittered positions shared by all channels, then
/// Poisson counts per channel. `delay_of(i, p)` maps the true position of
/// point `i` to the interferometer delay fed to the curves.
fn simulate_pass<F>(
    channels: &[(Channel, &dyn RateCurve)],
    plan: &ScanPlan,
    noise: &NoiseConfig,
    seed: u64,
    core: Core,
    delay_of: F,
) -> Result<Vec<ScanRecord>, ScanError>
where
    F: Fn(usize, f64) -> f64,
{
    plan.validate()?;
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(core.index());

    let commanded = plan.commanded_positions();
    let true_positions = jittered(&commanded, noise.position_jitter_sigma, &mut rng)?;
    let recorded: Vec<f64> = if noise.estimator_sees_true_positions {
        true_positions.iter().map(|&p| quantize_position(p)).collect()
    } else {
        commanded.iter().map(|&p| quantize_position(p)).collect()
    };

    let mut out = Vec::with_capacity(channels.len());
    for &(channel, curve) in channels {
        let mut counts = Vec::with_capacity(true_positions.len());
        for (i, &p) in true_positions.iter().enumerate() {
            let mean = curve.rate(delay_of(i, p)) * plan.integration_time;
            counts.push(sample_counts(mean, noise.shot_noise, &mut rng)?);
        }
        out.push(ScanRecord {
            positions: recorded.clone(),
            counts,
            integration_time: plan.integration_time,
            channel,
            core,
            seed,
        });
    }
    Ok(out)
}

/// Adds Gaussian jitter, redrawing any point that would not stay strictly
/// above its predecessor once stored at file precision.
fn jittered<R: Rng>(commanded: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>, ScanError> {
    if sigma == 0.0 {
        return Ok(commanded.to_vec());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| ScanError::Domain(e.to_string()))?;
    let mut out: Vec<f64> = Vec::with_capacity(commanded.len());
    for &c in commanded {
        let mut attempts = 0;
        loop {
            let p = c + normal.sample(rng);
            let ordered = out
                .last()
                .is_none_or(|&prev| quantize_position(p) > quantize_position(prev));
            if ordered {
                out.push(p);
                break;
            }
            attempts += 1;
            if attempts >= MAX_REDRAWS {
                return Err(ScanError::Ordering { position: c });
            }
        }
    }
    Ok(out)
}

fn sample_counts<R: Rng>(mean: f64, shot_noise: bool, rng: &mut R) -> Result<u64, ScanError> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(ScanError::NegativeRate(mean));
    }
    if !shot_noise {
        return Ok(mean.round() as u64);
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(mean).map_err(|e| ScanError::Domain(e.to_string()))?;
    Ok(poisson.sample(rng) as u64)
}
