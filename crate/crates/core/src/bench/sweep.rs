use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{precision_report, run_trials, BenchError, Experiment, PreparedExperiment};
use crate::optics::{dip_metrics, envelope_metrics};

/// Smallest scan accepted by the point-count sweep.
pub const MIN_SWEEP_POINTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSweepRow {
    pub points: usize,
    pub step_m: f64,
    pub integration_time_s: f64,
    pub sigma_quantum_m: Option<f64>,
    pub sigma_classical_m: Option<f64>,
    pub failure_fraction: f64,
}

/// Re-runs the benchmark with the span fixed and the number of points
/// changed. The total integration time of a scan is held at the base
/// value, so fewer points means longer integration per point.
pub fn scan_plan_sweep(
    base: &PreparedExperiment,
    point_counts: &[usize],
    n_trials: usize,
    root_seed: u64,
) -> Result<Vec<PlanSweepRow>, BenchError> {
    let e = base.experiment();
    let total = e.plan.duration();
    point_counts
        .iter()
        .map(|&points| {
            if points < MIN_SWEEP_POINTS {
                return Err(BenchError::Domain(format!(
                    "sweep needs at least {MIN_SWEEP_POINTS} points, got {points}"
                )));
            }
            let mut plan = e.plan.with_point_count(points)?;
            plan.integration_time = total / points as f64;
            let prepared = base.with_plan_and_noise(plan, e.noise)?;
            let report = precision_report(&run_trials(&prepared, n_trials, root_seed)?, 10)?;
            Ok(PlanSweepRow {
                points,
                step_m: plan.step,
                integration_time_s: plan.integration_time,
                sigma_quantum_m: report.quantum.map(|m| m.std_delta_tau_m),
                sigma_classical_m: report.classical.map(|m| m.std_delta_tau_m),
                failure_fraction: report.failure_fraction,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionSweepRow {
    pub beta2_l_s2: f64,
    pub quantum_dip_fwhm_m: f64,
    pub classical_envelope_fwhm_m: f64,
    pub sigma_quantum_m: Option<f64>,
    pub sigma_classical_m: Option<f64>,
    pub failure_fraction: f64,
}

/// Replaces the second-order dispersion of the sample (both curve models)
/// by each value in turn, keeping every other order.
pub fn dispersion_sensitivity_sweep(
    base: &Experiment,
    beta2_l_values: &[f64],
    n_trials: usize,
    root_seed: u64,
) -> Result<Vec<DispersionSweepRow>, BenchError> {
    beta2_l_values
        .iter()
        .map(|&b2l| {
            let mut e = base.clone();
            e.quantum.dispersion = e.quantum.dispersion.with_length_product(2, b2l)?;
            e.classical.dispersion = e.classical.dispersion.with_length_product(2, b2l)?;
            let dip = dip_metrics(&e.quantum.spectrum, &e.quantum.dispersion, &e.quadrature)?;
            let env = envelope_metrics(&e.classical.spectrum, &e.classical.dispersion, &e.quadrature)?;
            let report = precision_report(&run_trials(&e.prepare()?, n_trials, root_seed)?, 10)?;
            Ok(DispersionSweepRow {
                beta2_l_s2: b2l,
                quantum_dip_fwhm_m: dip.fwhm,
                classical_envelope_fwhm_m: env.fwhm,
                sigma_quantum_m: report.quantum.map(|m| m.std_delta_tau_m),
                sigma_classical_m: report.classical.map(|m| m.std_delta_tau_m),
                failure_fraction: report.failure_fraction,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with one column per field; a mode with no
/// successful trial leaves its σ cell empty.
pub fn write_sweep_csv<W: Write, R: Serialize>(rows: &[R], writer: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| BenchError::Serialize(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
