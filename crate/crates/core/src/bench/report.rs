use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{BenchError, TrialSet};
use crate::estimator::Mode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Normal distribution matched to the sample mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub successes: usize,
    pub failures: usize,
    pub mean_delta_tau_m: f64,
    pub std_delta_tau_m: f64,
    pub mean_delta_n: f64,
    pub std_delta_n: f64,
    /// Mean of the per-fit standard errors (m).
    pub mean_std_err_m: f64,
    pub normal_fit: NormalFit,
    /// Histogram of Δn.
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub trials: usize,
    pub root_seed: u64,
    pub delta_tau_true_m: f64,
    pub sample_length_m: f64,
    /// `None` when every trial of that mode failed.
    pub quantum: Option<ModeReport>,
    pub classical: Option<ModeReport>,
    /// std_classical / std_quantum of Δτ.
    pub ratio: Option<f64>,
    pub failure_fraction: f64,
}

impl PrecisionReport {
    pub fn mode(&self, mode: Mode) -> Option<&ModeReport> {
        match mode {
            Mode::Quantum => self.quantum.as_ref(),
            Mode::Classical => self.classical.as_ref(),
        }
    }
}

/// Summarises a trial set; modes with fewer than two successes are marked
/// unavailable.
pub fn precision_report(set: &TrialSet, bin_count: usize) -> Result<PrecisionReport, BenchError> {
    if bin_count == 0 {
        return Err(BenchError::Domain("histogram needs at least one bin".into()));
    }
    let length = set.experiment.scenario.sample_length;
    let mode_report = |mode: Mode| -> Option<ModeReport> {
        let estimates: Vec<_> = set
            .trials
            .iter()
            .filter_map(|t| t.outcome(mode).estimate())
            .collect();
        if estimates.len() < 2 {
            return None;
        }
        let taus: Vec<f64> = estimates.iter().map(|e| e.delta_tau).collect();
        let dns: Vec<f64> = taus.iter().map(|t| t / length).collect();
        let (mean_tau, std_tau) = mean_std(&taus);
        let (mean_dn, std_dn) = mean_std(&dns);
        let mean_se = estimates.iter().map(|e| e.standard_error).sum::<f64>() / estimates.len() as f64;
        Some(ModeReport {
            successes: estimates.len(),
            failures: set.trials.len() - estimates.len(),
            mean_delta_tau_m: mean_tau,
            std_delta_tau_m: std_tau,
            mean_delta_n: mean_dn,
            std_delta_n: std_dn,
            mean_std_err_m: mean_se,
            normal_fit: NormalFit {
                mean: mean_dn,
                std: std_dn,
            },
            histogram: histogram(&dns, bin_count),
        })
    };
    let quantum = mode_report(Mode::Quantum);
    let classical = mode_report(Mode::Classical);
    let ratio = match (&quantum, &classical) {
        (Some(q), Some(c)) if q.std_delta_tau_m > 0.0 => Some(c.std_delta_tau_m / q.std_delta_tau_m),
        _ => None,
    };
    Ok(PrecisionReport {
        trials: set.trials.len(),
        root_seed: set.root_seed,
        delta_tau_true_m: set.experiment.scenario.delta_tau_true,
        sample_length_m: length,
        quantum,
        classical,
        ratio,
        failure_fraction: set.failure_fraction(),
    })
}

/// Sample mean and standard deviation (n − 1 denominator), accumulated
/// relative to the first value so equal inputs give exactly zero spread.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let x0 = xs[0];
    let shift = xs.iter().map(|x| x - x0).sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - x0 - shift).powi(2)).sum::<f64>() / (n - 1.0);
    (x0 + shift, var.sqrt())
}

/// Equal-width bins over `[min, max]`; a degenerate range gets a tiny
/// symmetric width so every value lands in one bin.
pub fn histogram(values: &[f64], bin_count: usize) -> Histogram {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if values.is_empty() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        let pad = 1e-9 * lo.abs().max(1e-12);
        (lo - pad, hi + pad)
    };
    let width = (hi - lo) / bin_count as f64;
    let edges: Vec<f64> = (0..=bin_count).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0u64; bin_count];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bin_count - 1);
        counts[i] += 1;
    }
    Histogram { edges, counts }
}

/// One row per trial and mode: `seed,mode,delta_tau_m,delta_n`. Failed
/// estimates leave the two value fields empty.
pub fn write_trials_csv<W: Write>(set: &TrialSet, writer: W) -> Result<(), BenchError> {
    let length = set.experiment.scenario.sample_length;
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| BenchError::Serialize(e.to_string());
    w.write_record(["seed", "mode", "delta_tau_m", "delta_n"]).map_err(err)?;
    for t in &set.trials {
        for mode in [Mode::Quantum, Mode::Classical] {
            let (tau, dn) = match t.outcome(mode).estimate() {
                Some(e) => (e.delta_tau.to_string(), (e.delta_tau / length).to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([t.seed.to_string(), mode.to_string(), tau, dn]).map_err(err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `bin_lo,bin_hi,count` rows.
pub fn write_histogram_csv<W: Write>(hist: &Histogram, writer: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| BenchError::Serialize(e.to_string());
    w.write_record(["bin_lo", "bin_hi", "count"]).map_err(err)?;
    for (i, c) in hist.counts.iter().enumerate() {
        w.write_record([hist.edges[i].to_string(), hist.edges[i + 1].to_string(), c.to_string()])
            .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}
