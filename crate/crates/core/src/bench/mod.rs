//! Monte-Carlo benchmarking of the two estimators.
//!
//! Trial `i` of a run with root seed `s` simulates its core pair from
//! `derive_seed(s, i)`, so results never depend on thread scheduling.

mod report;
mod sweep;
mod trials;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::{EstimatorError, EstimatorTuning};
use crate::optics::{
    reference_dispersion, ClassicalCurveModel, ModelError, PreparedClassical, PreparedQuantum,
    QuadratureSpec, QuantumCurveModel, SpectrumModel,
};
use crate::scan::{
    build_scan_plan, calibrate_rates, simulate_core_pair, CoreCurves, CorePairRecords, DualCoreScenario,
    NoiseConfig, ScanError, ScanPlan,
};

pub use report::{
    histogram, precision_report, write_histogram_csv, write_trials_csv, Histogram, ModeReport, NormalFit,
    PrecisionReport,
};
pub use sweep::{
    dispersion_sensitivity_sweep, scan_plan_sweep, write_sweep_csv, DispersionSweepRow, PlanSweepRow,
};
pub use trials::{run_trials, Trial, TrialOutcome, TrialSet};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialize(String),
}

/// Path sampling step of the tabulated dispersive curves (m).
pub const TABLE_STEP: f64 = 5e-9;

/// Everything a dual-core measurement needs: physics, scan, noise and the
/// two estimator settings.
///
/// The `baseline_rate` and `mean_intensity` of the curve models only fix
/// their shape; absolute rates come from `noise`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub quantum: QuantumCurveModel,
    pub classical: ClassicalCurveModel,
    pub plan: ScanPlan,
    pub noise: NoiseConfig,
    pub scenario: DualCoreScenario,
    pub quantum_tuning: EstimatorTuning,
    pub classical_tuning: EstimatorTuning,
    pub quadrature: QuadratureSpec,
}

impl Experiment {
    /// 44 nm at 1560 nm, dip visibility 0.74, OCT visibility 0.5, reference
    /// dispersion of a 0.50 m sample, 120 µm scans in 0.24 µm steps of
    /// 0.5 s, and a 41.1 µm offset between the cores.
    pub fn reference() -> Result<Self, BenchError> {
        let spectrum = SpectrumModel::new(1560e-9, 44e-9)?;
        let length = 0.5;
        let dispersion = reference_dispersion(length)?;
        let quantum = QuantumCurveModel::new(spectrum, 1.0, 0.74, 1.0, dispersion.clone())?;
        let classical = ClassicalCurveModel::new(spectrum, 1.0, 0.5, dispersion)?;
        let mut scenario = DualCoreScenario::new(41.1e-6, length)?;
        scenario.sample_length_uncertainty = 1e-4;
        Ok(Self {
            quantum,
            classical,
            plan: build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5)?,
            noise: NoiseConfig::default(),
            scenario,
            quantum_tuning: EstimatorTuning::quantum(&spectrum),
            classical_tuning: EstimatorTuning::classical(&spectrum),
            quadrature: QuadratureSpec::default(),
        })
    }

    /// Delay range the curves must cover for both cores, with margin for
    /// jitter and drift.
    pub fn delay_range(&self) -> (f64, f64) {
        let (lo1, hi1) = self.plan.window();
        let (lo2, hi2) = self.plan.with_center(self.scenario.core2_center(&self.plan)).window();
        let shift = self.scenario.delta_tau_true;
        let margin = 2.0 * self.scenario.drift_per_scan.abs() + 20.0 * self.noise.position_jitter_sigma + 1e-6;
        (lo1.min(lo2 - shift) - margin, hi1.max(hi2 - shift) + margin)
    }

    /// Tabulates the curves and scales them to the configured count rates.
    pub fn prepare(&self) -> Result<PreparedExperiment, BenchError> {
        self.scenario.validate()?;
        self.quantum_tuning.validate()?;
        self.classical_tuning.validate()?;
        let range = self.delay_range();
        let q = self.quantum.prepare(range, TABLE_STEP, &self.quadrature)?;
        let c = self.classical.prepare(range, TABLE_STEP, &self.quadrature)?;
        let (quantum, classical) = calibrate_rates(&q, &c, &self.noise, &self.plan)?;
        Ok(PreparedExperiment {
            experiment: self.clone(),
            quantum,
            classical,
        })
    }
}

/// An [`Experiment`] with curves ready for repeated simulation.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    experiment: Experiment,
    quantum: PreparedQuantum,
    classical: PreparedClassical,
}

impl PreparedExperiment {
    pub fn experiment(&self) -> &Experiment {
        &self.experiment
    }

    pub fn quantum_curve(&self) -> &PreparedQuantum {
        &self.quantum
    }

    pub fn classical_curve(&self) -> &PreparedClassical {
        &self.classical
    }

    /// Records of both cores and both channels for one seed.
    pub fn simulate(&self, seed: u64) -> Result<CorePairRecords, BenchError> {
        let e = &self.experiment;
        Ok(simulate_core_pair(
            &e.scenario,
            CoreCurves {
                singles: &self.classical,
                coincidences: &self.quantum,
            },
            &e.plan,
            &e.noise,
            seed,
        )?)
    }

    /// Same curve shapes with new rates and scan settings; only the rate
    /// calibration is redone.
    pub fn with_plan_and_noise(&self, plan: ScanPlan, noise: NoiseConfig) -> Result<Self, BenchError> {
        let mut experiment = self.experiment.clone();
        experiment.plan = plan;
        experiment.noise = noise;
        let (lo, hi) = experiment.delay_range();
        let (old_lo, old_hi) = self.experiment.delay_range();
        if lo < old_lo || hi > old_hi {
            return experiment.prepare();
        }
        let (quantum, classical) = calibrate_rates(&self.quantum, &self.classical, &noise, &plan)?;
        Ok(Self {
            experiment,
            quantum,
            classical,
        })
    }
}
