use serde::{Deserialize, Serialize};

use super::ModelError;

/// Width, depth and area of a single-extremum profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMetrics {
    /// Full width at half the extremum, same unit as the delays.
    pub fwhm: f64,
    pub extremum_position: f64,
    /// |value| at the extremum; equals the visibility for a normalized deficit.
    pub extremum_visibility: f64,
    /// Trapezoidal integral of the profile, signed so the extremum counts positive.
    pub dip_area: f64,
}

/// Measures a profile that sits on a zero baseline.
///
/// Half-maximum crossings are found by walking outward from the global
/// extremum and interpolating linearly between the bracketing samples.
pub fn curve_metrics(delays: &[f64], values: &[f64]) -> Result<CurveMetrics, ModelError> {
    if delays.len() != values.len() {
        return Err(ModelError::Domain(format!(
            "{} delays but {} values",
            delays.len(),
            values.len()
        )));
    }
    if delays.len() < 3 {
        return Err(ModelError::Domain("need at least three samples".into()));
    }
    if delays.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ModelError::Domain("delays must be strictly increasing".into()));
    }
    let (peak, &extremum) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty");
    if extremum == 0.0 {
        return Err(ModelError::NoHalfMaximum);
    }
    let sign = extremum.signum();
    let half = 0.5 * extremum.abs();
    let level = |i: usize| sign * values[i];

    let mut left = None;
    for i in (0..peak).rev() {
        if level(i) < half {
            left = Some(crossing(delays[i], level(i), delays[i + 1], level(i + 1), half));
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..values.len() {
        if level(i) < half {
            right = Some(crossing(delays[i - 1], level(i - 1), delays[i], level(i), half));
            break;
        }
    }
    let (Some(l), Some(r)) = (left, right) else {
        return Err(ModelError::NoHalfMaximum);
    };

    let dip_area = delays
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum::<f64>()
        * sign;

    Ok(CurveMetrics {
        fwhm: r - l,
        extremum_position: delays[peak],
        extremum_visibility: extremum.abs(),
        dip_area,
    })
}

/// Converts rates around a baseline into the normalized deficit
/// `(baseline − rate)/baseline` and measures it.
pub fn deficit_metrics(delays: &[f64], rates: &[f64], baseline: f64) -> Result<CurveMetrics, ModelError> {
    if !(baseline > 0.0) {
        return Err(ModelError::Domain("baseline must be positive".into()));
    }
    let deficit: Vec<f64> = rates.iter().map(|r| (baseline - r) / baseline).collect();
    curve_metrics(delays, &deficit)
}

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return 0.5 * (x0 + x1);
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}
