use serde::Serialize;

use super::EstimatorError;
use crate::scan::{Channel, Core, ScanRecord};

/// Fewest baseline points accepted for the mean estimate.
pub const MIN_BASELINE_POINTS: usize = 50;

/// A record with its baseline removed, ready for the transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenteredRecord {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
    /// Mean of the counts that were used as baseline.
    pub baseline: f64,
    /// Position of the interferogram found by the moving-window search.
    pub coarse_center: f64,
    pub baseline_points: usize,
    pub channel: Channel,
    pub core: Core,
    pub seed: u64,
}

/// Subtracts the mean of the counts lying farther than `exclusion_halfwidth`
/// from the coarse interferogram center.
///
/// The coarse center is where the local signal power, the squared deviation
/// from the global mean averaged over a window of `smoothing_width`, is
/// largest. Squaring makes the search work both for a dip and for a fringe
/// packet whose plain average is flat.
pub fn preprocess(
    record: &ScanRecord,
    exclusion_halfwidth: f64,
    smoothing_width: f64,
) -> Result<CenteredRecord, EstimatorError> {
    let fail = |m: String| EstimatorError::Preprocess(m);
    record.validate().map_err(|e| fail(e.to_string()))?;
    if !(exclusion_halfwidth >= 0.0) || !exclusion_halfwidth.is_finite() {
        return Err(fail(format!("exclusion halfwidth must be non-negative, got {exclusion_halfwidth}")));
    }
    if !(smoothing_width >= 0.0) || !smoothing_width.is_finite() {
        return Err(fail(format!("smoothing width must be non-negative, got {smoothing_width}")));
    }
    let positions = &record.positions;
    let counts: Vec<f64> = record.counts.iter().map(|&c| c as f64).collect();

    let coarse_center = coarse_center(positions, &counts, smoothing_width);
    let (lo, hi) = (coarse_center - exclusion_halfwidth, coarse_center + exclusion_halfwidth);
    let outside = |p: f64| exclusion_halfwidth == 0.0 || p < lo || p > hi;

    let (sum, n) = positions
        .iter()
        .zip(&counts)
        .filter(|(&p, _)| outside(p))
        .fold((0.0, 0usize), |(s, n), (_, &c)| (s + c, n + 1));
    if n < MIN_BASELINE_POINTS {
        return Err(fail(format!(
            "only {n} points outside ±{exclusion_halfwidth:e} m of {coarse_center:e} m, need {MIN_BASELINE_POINTS}"
        )));
    }
    let baseline = sum / n as f64;

    Ok(CenteredRecord {
        positions: positions.clone(),
        values: counts.iter().map(|c| c - baseline).collect(),
        baseline,
        coarse_center,
        baseline_points: n,
        channel: record.channel,
        core: record.core,
        seed: record.seed,
    })
}

fn coarse_center(positions: &[f64], counts: &[f64], width: f64) -> f64 {
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let power: Vec<f64> = counts.iter().map(|c| (c - mean).powi(2)).collect();
    let mut prefix = Vec::with_capacity(power.len() + 1);
    prefix.push(0.0);
    for p in &power {
        prefix.push(prefix.last().unwrap() + p);
    }

    let half = 0.5 * width;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut best = (f64::NEG_INFINITY, positions[0]);
    for (i, &p) in positions.iter().enumerate() {
        while positions[lo] < p - half {
            lo += 1;
        }
        while hi < positions.len() && positions[hi] <= p + half {
            hi += 1;
        }
        let avg = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
        if avg > best.0 {
            best = (avg, positions[i]);
        }
    }
    best.1
}
