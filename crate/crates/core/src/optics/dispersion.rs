use serde::{Deserialize, Serialize};

use super::ModelError;

/// One Taylor term of the propagation constant, `β_k` in s^k/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTerm {
    pub order: u32,
    pub coefficient: f64,
}

/// Spectral phase picked up in the sample:
/// `φ(Ω) = L · Σ_k β_k Ω^k / k!` with Ω the detuning from the spectrum center.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DispersionProfile {
    sample_length: f64,
    terms: Vec<PhaseTerm>,
}

impl DispersionProfile {
    pub fn new(sample_length: f64, terms: Vec<PhaseTerm>) -> Result<Self, ModelError> {
        if !(sample_length >= 0.0) || !sample_length.is_finite() {
            return Err(ModelError::Domain(format!(
                "sample length must be non-negative, got {sample_length}"
            )));
        }
        let mut seen = Vec::with_capacity(terms.len());
        for t in &terms {
            if t.order < 2 {
                return Err(ModelError::Domain(format!(
                    "dispersion orders start at 2, got {}",
                    t.order
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(ModelError::Domain(format!(
                    "non-finite coefficient for order {}",
                    t.order
                )));
            }
            if seen.contains(&t.order) {
                return Err(ModelError::Domain(format!("duplicate dispersion order {}", t.order)));
            }
            seen.push(t.order);
        }
        let mut terms = terms;
        terms.sort_by_key(|t| t.order);
        Ok(Self {
            sample_length,
            terms,
        })
    }

    /// No dispersion at all.
    pub fn none() -> Self {
        Self::default()
    }

    /// Builds a profile from products `β_k·L` (s^k) for a given length.
    pub fn from_length_products(
        sample_length: f64,
        products: &[(u32, f64)],
    ) -> Result<Self, ModelError> {
        if !(sample_length > 0.0) {
            return Err(ModelError::Domain(
                "length products need a positive sample length".into(),
            ));
        }
        let terms = products
            .iter()
            .map(|&(order, p)| PhaseTerm {
                order,
                coefficient: p / sample_length,
            })
            .collect();
        Self::new(sample_length, terms)
    }

    pub fn sample_length(&self) -> f64 {
        self.sample_length
    }

    pub fn terms(&self) -> &[PhaseTerm] {
        &self.terms
    }

    /// `β_k·L` for the given order, zero when absent.
    pub fn length_product(&self, order: u32) -> f64 {
        self.terms
            .iter()
            .find(|t| t.order == order)
            .map_or(0.0, |t| t.coefficient * self.sample_length)
    }

    /// Returns a copy with the order's `β_k·L` replaced (or inserted).
    pub fn with_length_product(&self, order: u32, product: f64) -> Result<Self, ModelError> {
        let length = if self.sample_length > 0.0 {
            self.sample_length
        } else {
            1.0
        };
        let mut terms: Vec<PhaseTerm> = self.terms.iter().copied().filter(|t| t.order != order).collect();
        terms.push(PhaseTerm {
            order,
            coefficient: product / length,
        });
        Self::new(length, terms)
    }

    pub fn phase(&self, detuning: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| self.term_phase(t, detuning))
            .sum()
    }

    pub fn even_phase(&self, detuning: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.order % 2 == 0)
            .map(|t| self.term_phase(t, detuning))
            .sum()
    }

    pub fn odd_phase(&self, detuning: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.order % 2 == 1)
            .map(|t| self.term_phase(t, detuning))
            .sum()
    }

    /// Only even orders survive.
    pub fn even_part(&self) -> Self {
        Self {
            sample_length: self.sample_length,
            terms: self.terms.iter().copied().filter(|t| t.order % 2 == 0).collect(),
        }
    }

    /// Only odd orders survive.
    pub fn odd_part(&self) -> Self {
        Self {
            sample_length: self.sample_length,
            terms: self.terms.iter().copied().filter(|t| t.order % 2 == 1).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sample_length == 0.0 || self.terms.iter().all(|t| t.coefficient == 0.0)
    }

    pub fn has_odd_terms(&self) -> bool {
        self.sample_length != 0.0 && self.terms.iter().any(|t| t.order % 2 == 1 && t.coefficient != 0.0)
    }

    fn term_phase(&self, t: &PhaseTerm, detuning: f64) -> f64 {
        t.coefficient * self.sample_length * detuning.powi(t.order as i32) / factorial(t.order)
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}
