use std::time::SystemTime;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::{BenchError, Experiment, PreparedExperiment};
use crate::estimator::{estimate_delta_tau, DeltaTauEstimate, EstimateJson, Mode};
use crate::scan::derive_seed;

/// Result of one estimator on one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Ok(DeltaTauEstimate),
    Failed(String),
}

impl TrialOutcome {
    pub fn estimate(&self) -> Option<&DeltaTauEstimate> {
        match self {
            TrialOutcome::Ok(e) => Some(e),
            TrialOutcome::Failed(_) => None,
        }
    }
}

impl Serialize for TrialOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(rename_all = "snake_case")]
        enum Repr<'a> {
            Ok(EstimateJson),
            Failed(&'a str),
        }
        match self {
            TrialOutcome::Ok(e) => Repr::Ok(e.to_json()),
            TrialOutcome::Failed(m) => Repr::Failed(m),
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub index: usize,
    pub seed: u64,
    pub quantum: TrialOutcome,
    pub classical: TrialOutcome,
    /// The true core-2 zero delay fell outside its scan window.
    pub dip_outside_window: bool,
}

impl Trial {
    pub fn outcome(&self, mode: Mode) -> &TrialOutcome {
        match mode {
            Mode::Quantum => &self.quantum,
            Mode::Classical => &self.classical,
        }
    }
}

/// Trials in index order plus the configuration that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSet {
    pub root_seed: u64,
    pub experiment: Experiment,
    pub trials: Vec<Trial>,
    #[serde(skip)]
    pub started: Option<SystemTime>,
    #[serde(skip)]
    pub finished: Option<SystemTime>,
}

impl TrialSet {
    /// Fraction of trials in which at least one estimator failed.
    pub fn failure_fraction(&self) -> f64 {
        if self.trials.is_empty() {
            return 0.0;
        }
        let failed = self
            .trials
            .iter()
            .filter(|t| t.quantum.estimate().is_none() || t.classical.estimate().is_none())
            .count();
        failed as f64 / self.trials.len() as f64
    }
}

/// Runs `n_trials` independent dual-core measurements in parallel.
///
/// Estimator failures are recorded in the trial rather than aborting the
/// set; simulation failures abort, since they indicate a bad configuration.
pub fn run_trials(
    prepared: &PreparedExperiment,
    n_trials: usize,
    root_seed: u64,
) -> Result<TrialSet, BenchError> {
    if n_trials < 2 {
        return Err(BenchError::Domain(format!("need at least 2 trials, got {n_trials}")));
    }
    let started = SystemTime::now();
    let e = prepared.experiment();
    let trials = (0..n_trials)
        .into_par_iter()
        .map(|index| {
            let seed = derive_seed(root_seed, index as u64);
            let records = prepared.simulate(seed)?;
            let run = |r1, r2, tuning| match estimate_delta_tau(r1, r2, tuning) {
                Ok(est) => TrialOutcome::Ok(est),
                Err(err) => TrialOutcome::Failed(err.to_string()),
            };
            Ok(Trial {
                index,
                seed,
                quantum: run(&records.core1.coincidences, &records.core2.coincidences, &e.quantum_tuning),
                classical: run(&records.core1.singles, &records.core2.singles, &e.classical_tuning),
                dip_outside_window: records.dip_outside_window,
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    Ok(TrialSet {
        root_seed,
        experiment: e.clone(),
        trials,
        started: Some(started),
        finished: Some(SystemTime::now()),
    })
}
