use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::numeric::{
    degree_of_coherence, dip_closed_form, envelope_closed_form, hom_dip_numeric, QuadratureSpec,
};
use super::{DispersionProfile, ModelError, SpectrumModel, SPEED_OF_LIGHT};

/// Shape of the pump-frequency fringe term of the coincidence curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FringeEnvelope {
    /// Unmodulated fringe over the whole scan.
    #[default]
    Flat,
    /// Fringe contrast follows the dip shape and vanishes away from it.
    Dip,
}

/// Coincidence rate `P_c(0)·(2 − v·cos(ω_p τ) − α·dip(τ))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCurveModel {
    pub spectrum: SpectrumModel,
    /// P_c(0) in coincidences per second.
    pub baseline_rate: f64,
    /// α
    pub dip_visibility: f64,
    pub fringe_visibility: f64,
    pub pump_angular_frequency: f64,
    pub dispersion: DispersionProfile,
    pub fringe_envelope: FringeEnvelope,
}

impl QuantumCurveModel {
    pub fn new(
        spectrum: SpectrumModel,
        baseline_rate: f64,
        dip_visibility: f64,
        fringe_visibility: f64,
        dispersion: DispersionProfile,
    ) -> Result<Self, ModelError> {
        let model = Self {
            pump_angular_frequency: spectrum.pump_angular_frequency(),
            spectrum,
            baseline_rate,
            dip_visibility,
            fringe_visibility,
            dispersion,
            fringe_envelope: FringeEnvelope::Flat,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.baseline_rate >= 0.0) || !self.baseline_rate.is_finite() {
            return Err(ModelError::Domain(format!(
                "coincidence baseline rate must be non-negative, got {}",
                self.baseline_rate
            )));
        }
        check_unit_interval("dip visibility", self.dip_visibility)?;
        check_unit_interval("fringe visibility", self.fringe_visibility)?;
        if !(self.pump_angular_frequency > 0.0) {
            return Err(ModelError::Domain("pump angular frequency must be positive".into()));
        }
        Ok(())
    }

    fn fringe(&self, delay: f64, dip: f64) -> f64 {
        let envelope = match self.fringe_envelope {
            FringeEnvelope::Flat => 1.0,
            FringeEnvelope::Dip => dip,
        };
        self.fringe_visibility * envelope * (self.pump_angular_frequency * delay / SPEED_OF_LIGHT).cos()
    }

    fn rate_with_dip(&self, delay: f64, dip: f64) -> f64 {
        self.baseline_rate * (2.0 - self.fringe(delay, dip) - self.dip_visibility * dip)
    }

    /// Tabulates the dip over `range` (m of path) for fast repeated evaluation.
    ///
    /// Without odd-order dispersion the closed form is exact and no table is
    /// built. Outside the tabulated range the dip is taken as zero.
    pub fn prepare(
        &self,
        range: (f64, f64),
        table_step: f64,
        quad: &QuadratureSpec,
    ) -> Result<PreparedQuantum, ModelError> {
        self.validate()?;
        let dip = if self.dispersion.has_odd_terms() {
            let delays = table_delays(range, table_step)?;
            let values = hom_dip_numeric(&self.spectrum, &self.dispersion, &delays, quad)?;
            DipShape::Table(Arc::new(Table::new(delays[0], table_step, values)))
        } else {
            DipShape::Closed
        };
        Ok(PreparedQuantum {
            model: self.clone(),
            dip,
        })
    }
}

/// Single-photon intensity `I0·[1 − V·Re(e^{iω_c τ}·γ(τ))]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCurveModel {
    pub spectrum: SpectrumModel,
    /// I0 in counts per second.
    pub mean_intensity: f64,
    pub visibility: f64,
    pub carrier_angular_frequency: f64,
    pub dispersion: DispersionProfile,
}

impl ClassicalCurveModel {
    pub fn new(
        spectrum: SpectrumModel,
        mean_intensity: f64,
        visibility: f64,
        dispersion: DispersionProfile,
    ) -> Result<Self, ModelError> {
        let model = Self {
            carrier_angular_frequency: spectrum.center_angular_frequency(),
            spectrum,
            mean_intensity,
            visibility,
            dispersion,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.mean_intensity >= 0.0) || !self.mean_intensity.is_finite() {
            return Err(ModelError::Domain(format!(
                "mean intensity must be non-negative, got {}",
                self.mean_intensity
            )));
        }
        check_unit_interval("visibility", self.visibility)?;
        if !(self.carrier_angular_frequency > 0.0) {
            return Err(ModelError::Domain("carrier angular frequency must be positive".into()));
        }
        Ok(())
    }

    fn rate_with_coherence(&self, delay: f64, coherence: Complex64) -> f64 {
        let carrier = Complex64::cis(self.carrier_angular_frequency * delay / SPEED_OF_LIGHT);
        self.mean_intensity * (1.0 - self.visibility * (carrier * coherence).re)
    }

    pub fn prepare(
        &self,
        range: (f64, f64),
        table_step: f64,
        quad: &QuadratureSpec,
    ) -> Result<PreparedClassical, ModelError> {
        self.validate()?;
        let coherence = if self.dispersion.is_zero() {
            CoherenceShape::Closed
        } else {
            let delays = table_delays(range, table_step)?;
            let values = degree_of_coherence(&self.spectrum, &self.dispersion, &delays, quad)?;
            CoherenceShape::Table(Arc::new(Table::new(delays[0], table_step, values)))
        };
        Ok(PreparedClassical {
            model: self.clone(),
            coherence,
        })
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// Ideal coincidence rate at a single delay (m of path).
///
/// With odd-order dispersion the dip comes from the spectral integral,
/// otherwise from the closed form.
pub fn quantum_coincidence(model: &QuantumCurveModel, delay: f64) -> Result<f64, ModelError> {
    model.validate()?;
    let dip = if model.dispersion.has_odd_terms() {
        hom_dip_numeric(&model.spectrum, &model.dispersion, &[delay], &QuadratureSpec::default())?[0]
    } else {
        dip_closed_form(&model.spectrum, delay)
    };
    Ok(model.rate_with_dip(delay, dip))
}

/// Ideal single-photon rate at a single delay (m of path).
pub fn classical_intensity(model: &ClassicalCurveModel, delay: f64) -> Result<f64, ModelError> {
    model.validate()?;
    let coherence = if model.dispersion.is_zero() {
        Complex64::new(envelope_closed_form(&model.spectrum, delay), 0.0)
    } else {
        degree_of_coherence(&model.spectrum, &model.dispersion, &[delay], &QuadratureSpec::default())?[0]
    };
    Ok(model.rate_with_coherence(delay, coherence))
}

/// Anything that yields an expected count rate as a function of delay.
pub trait RateCurve: Send + Sync {
    fn rate(&self, delay: f64) -> f64;
}

#[derive(Debug)]
struct Table<T> {
    start: f64,
    step: f64,
    values: Vec<T>,
}

impl<T> Table<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    fn new(start: f64, step: f64, values: Vec<T>) -> Self {
        Self { start, step, values }
    }

    fn lookup(&self, x: f64) -> Option<T> {
        let u = (x - self.start) / self.step;
        if !(u >= 0.0) {
            return None;
        }
        let i = u.floor() as usize;
        if i + 1 >= self.values.len() {
            return if i + 1 == self.values.len() && u == i as f64 {
                Some(self.values[i])
            } else {
                None
            };
        }
        let frac = u - i as f64;
        Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }
}

fn table_delays(range: (f64, f64), step: f64) -> Result<Vec<f64>, ModelError> {
    let (lo, hi) = range;
    if !(hi > lo) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(ModelError::Domain(format!(
            "invalid table range [{lo}, {hi}] with step {step}"
        )));
    }
    let n = ((hi - lo) / step).ceil() as usize + 1;
    if n > 5_000_000 {
        return Err(ModelError::Domain(format!("table of {n} points is too large")));
    }
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Debug, Clone)]
enum DipShape {
    Closed,
    Table(Arc<Table<f64>>),
}

/// Quantum model with its dip shape ready for fast evaluation.
#[derive(Debug, Clone)]
pub struct PreparedQuantum {
    model: QuantumCurveModel,
    dip: DipShape,
}

impl PreparedQuantum {
    pub fn model(&self) -> &QuantumCurveModel {
        &self.model
    }

    pub fn dip(&self, delay: f64) -> f64 {
        match &self.dip {
            DipShape::Closed => dip_closed_form(&self.model.spectrum, delay),
            DipShape::Table(t) => t.lookup(delay).unwrap_or(0.0),
        }
    }

    /// Same shape with a different P_c(0).
    pub fn with_baseline_rate(&self, baseline_rate: f64) -> Self {
        let mut out = self.clone();
        out.model.baseline_rate = baseline_rate;
        out
    }
}

impl RateCurve for PreparedQuantum {
    fn rate(&self, delay: f64) -> f64 {
        self.model.rate_with_dip(delay, self.dip(delay))
    }
}

#[derive(Debug, Clone)]
enum CoherenceShape {
    Closed,
    Table(Arc<Table<Complex64>>),
}

/// Classical model with its degree of coherence ready for fast evaluation.
#[derive(Debug, Clone)]
pub struct PreparedClassical {
    model: ClassicalCurveModel,
    coherence: CoherenceShape,
}

impl PreparedClassical {
    pub fn model(&self) -> &ClassicalCurveModel {
        &self.model
    }

    pub fn coherence(&self, delay: f64) -> Complex64 {
        match &self.coherence {
            CoherenceShape::Closed => Complex64::new(envelope_closed_form(&self.model.spectrum, delay), 0.0),
            CoherenceShape::Table(t) => t.lookup(delay).unwrap_or_default(),
        }
    }

    pub fn with_mean_intensity(&self, mean_intensity: f64) -> Self {
        let mut out = self.clone();
        out.model.mean_intensity = mean_intensity;
        out
    }
}

impl RateCurve for PreparedClassical {
    fn rate(&self, delay: f64) -> f64 {
        self.model.rate_with_coherence(delay, self.coherence(delay))
    }
}
