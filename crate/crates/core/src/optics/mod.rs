//! Noise-free interferogram models.
//!
//! Delays are expressed everywhere as optical path differences in meters;
//! the time delay is `delay / c`.

mod calibrate;
mod curves;
mod dispersion;
mod metrics;
mod numeric;
mod spectrum;

use thiserror::Error;

pub use calibrate::{
    cubic_for_dip_broadening, dip_metrics, envelope_metrics, quadratic_for_envelope_fwhm,
};
pub use curves::{
    classical_intensity, quantum_coincidence, ClassicalCurveModel, FringeEnvelope, PreparedClassical,
    PreparedQuantum, QuantumCurveModel, RateCurve,
};
pub use dispersion::{DispersionProfile, PhaseTerm};
pub use metrics::{curve_metrics, deficit_metrics, CurveMetrics};
pub use numeric::{
    classical_envelope_numeric, dip_closed_form, dip_fwhm_closed_form, envelope_closed_form,
    envelope_fwhm_closed_form, hom_dip_numeric, spectral_sum, Coherence, QuadratureSpec,
};
pub use spectrum::{sigma_from_fwhm, SpectralGrid, SpectrumModel, GAUSSIAN_FWHM_PER_SIGMA, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("spectral quadrature did not converge to {tolerance:e} with {nodes} nodes")]
    UnderResolved { nodes: usize, tolerance: f64 },
    #[error("no half-maximum crossing inside the sampled range")]
    NoHalfMaximum,
}

/// β₃L (s³) that widens the 44 nm / 1560 nm dip by 19 %.
///
/// Obtained with [`cubic_for_dip_broadening`]; pinned by a test.
pub const REFERENCE_BETA3_L: f64 = 2.844_048_719_951e-40;

/// β₂L (s²) that, together with [`REFERENCE_BETA3_L`], widens the 44 nm /
/// 1560 nm single-photon envelope to 134 µm FWHM.
///
/// Obtained with [`quadratic_for_envelope_fwhm`]; pinned by a test.
pub const REFERENCE_BETA2_L: f64 = 1.263_140_418_004e-26;

/// Default sample dispersion built from the reference length products.
pub fn reference_dispersion(sample_length: f64) -> Result<DispersionProfile, ModelError> {
    DispersionProfile::from_length_products(
        sample_length,
        &[(2, REFERENCE_BETA2_L), (3, REFERENCE_BETA3_L)],
    )
}
