use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DeltaTauEstimate, Diagnostics, EstimatorError, FourierSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWeighting {
    /// Weight each bin by `|X₁|·|X₂|`.
    #[default]
    Magnitude,
    Uniform,
}

/// Straight-line fit to the unwrapped phase of `X₂·conj(X₁)`.
///
/// `prior_delay` is a rough guess of the offset (m). Its phase ramp is
/// removed before unwrapping and added back to the fitted delay, so the
/// unwrap only has to follow the residual phase. Zero disables this.
///
/// Only bins present in both spectra are used. The slope standard error is
/// built from the weighted residuals and corrected for the correlation
/// between neighbouring bins of an oversampled grid: `correlation_length`
/// is the number of bins per independent frequency sample (the
/// oversampling factor).
pub fn differential_phase_fit(
    spec1: &FourierSpectrum,
    spec2: &FourierSpectrum,
    weighting: FitWeighting,
    correlation_length: f64,
    prior_delay: f64,
) -> Result<DeltaTauEstimate, EstimatorError> {
    let fail = |m: String| EstimatorError::PhaseFit(m);
    if !prior_delay.is_finite() {
        return Err(fail(format!("prior delay must be finite, got {prior_delay}")));
    }
    if !(correlation_length >= 1.0) {
        return Err(fail(format!("correlation length must be at least 1, got {correlation_length}")));
    }
    let mut freqs = Vec::new();
    let mut cross = Vec::new();
    let mut weights = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < spec1.len() && j < spec2.len() {
        let (f1, f2) = (spec1.frequencies[i], spec2.frequencies[j]);
        if f1 == f2 {
            let (a, b) = (spec1.amplitudes[i], spec2.amplitudes[j]);
            freqs.push(f1);
            cross.push(b * a.conj() * Complex64::cis(2.0 * PI * f1 * prior_delay));
            weights.push(match weighting {
                FitWeighting::Magnitude => a.norm() * b.norm(),
                FitWeighting::Uniform => 1.0,
            });
            i += 1;
            j += 1;
        } else if f1 < f2 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let n = freqs.len();
    if n < 3 {
        return Err(fail(format!("only {n} common bins between the two spectra")));
    }

    let wrapped: Vec<f64> = cross.iter().map(|c| c.arg()).collect();
    let phase = unwrap(&wrapped);
    let jumps = irregular_steps(&phase);
    if 4 * jumps > n {
        return Err(fail(format!("{jumps} irregular phase steps in {n} bins")));
    }

    let line = weighted_line(&freqs, &phase, &weights).ok_or_else(|| fail("degenerate fit".into()))?;
    let dof = (n as f64 - 2.0 * correlation_length).max(1.0);
    let rss: f64 = freqs
        .iter()
        .zip(&phase)
        .zip(&weights)
        .map(|((f, y), w)| w * (y - line.intercept - line.slope * f).powi(2))
        .sum();
    let slope_var = correlation_length * rss / dof / line.sxx;
    let weight_sum: f64 = weights.iter().sum();

    Ok(DeltaTauEstimate {
        delta_tau: prior_delay - line.slope / (2.0 * PI),
        standard_error: slope_var.sqrt() / (2.0 * PI),
        mode: None,
        band: None,
        diagnostics: Diagnostics {
            bins: n,
            residual_rms: (rss / weight_sum).sqrt(),
            unwrap_jumps: jumps,
            intercept: line.intercept,
        },
    })
}

/// Sequential nearest-branch unwrap.
pub fn unwrap(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (k, &p) in phase.iter().enumerate() {
        if k > 0 {
            let d = p - phase[k - 1];
            offset -= 2.0 * PI * (d / (2.0 * PI)).round();
        }
        out.push(p + offset);
    }
    out
}

/// Number of unwrapped phase increments that differ from the median
/// increment by more than π/2, i.e. steps the unwrap had to guess.
fn irregular_steps(phase: &[f64]) -> usize {
    let mut d: Vec<f64> = phase.windows(2).map(|w| w[1] - w[0]).collect();
    if d.is_empty() {
        return 0;
    }
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    d.retain(|x| (x - median).abs() > 0.5 * PI);
    d.len()
}

struct Line {
    slope: f64,
    intercept: f64,
    sxx: f64,
}

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<Line> {
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) {
        return None;
    }
    let xm = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - xm) * (y - ym)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some(Line {
        slope,
        intercept: ym - slope * xm,
        sxx,
    })
}
