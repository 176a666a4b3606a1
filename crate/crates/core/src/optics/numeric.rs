//! Spectral-integral evaluation of interferogram shapes.
//!
//! Both shapes are sums over a normalized Gaussian density on a uniform
//! trapezoid grid. The grid is refined by doubling until two successive
//! refinements agree to the requested tolerance at every delay, so an
//! under-resolved integral is reported instead of returned.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DispersionProfile, ModelError, SpectrumModel, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Integration range in units of the spectral σ on each side.
    pub half_range_sigmas: f64,
    /// Starting density of nodes; refinement only adds nodes.
    pub min_nodes_per_sigma: f64,
    /// Maximum absolute change allowed between two refinements.
    pub tolerance: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            half_range_sigmas: 6.0,
            min_nodes_per_sigma: 10.0,
            tolerance: 1e-9,
            max_nodes: 1 << 17,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<(), ModelError> {
        if !(self.half_range_sigmas >= 3.0) {
            return Err(ModelError::Domain(format!(
                "quadrature range of {} sigma truncates the spectrum",
                self.half_range_sigmas
            )));
        }
        if !(self.min_nodes_per_sigma >= 10.0) {
            return Err(ModelError::Domain(format!(
                "quadrature needs at least 10 nodes per sigma, got {}",
                self.min_nodes_per_sigma
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(ModelError::Domain("quadrature tolerance must be positive".into()));
        }
        Ok(())
    }

    fn initial_nodes(&self) -> usize {
        let n = (2.0 * self.half_range_sigmas * self.min_nodes_per_sigma).ceil() as usize + 1;
        n | 1
    }
}

/// Evaluates `Σ_j w_j exp(i[ψ(Ω_j) + m·Ω_j·x/c])` for every delay `x` (m of path),
/// refining the grid until converged.
pub fn spectral_sum<F>(
    spectrum: &SpectrumModel,
    quad: &QuadratureSpec,
    phase: F,
    delay_multiplier: f64,
    delays: &[f64],
) -> Result<Vec<Complex64>, ModelError>
where
    F: Fn(f64) -> f64 + Sync,
{
    quad.validate()?;
    if let Some(bad) = delays.iter().find(|d| !d.is_finite()) {
        return Err(ModelError::Domain(format!("non-finite delay {bad}")));
    }
    let mut nodes = quad.initial_nodes();
    let mut previous = sum_on_grid(spectrum, quad.half_range_sigmas, nodes, &phase, delay_multiplier, delays);
    loop {
        let refined_nodes = 2 * nodes - 1;
        if refined_nodes > quad.max_nodes {
            return Err(ModelError::UnderResolved {
                nodes,
                tolerance: quad.tolerance,
            });
        }
        let current = sum_on_grid(
            spectrum,
            quad.half_range_sigmas,
            refined_nodes,
            &phase,
            delay_multiplier,
            delays,
        );
        let change = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if change <= quad.tolerance {
            return Ok(current);
        }
        previous = current;
        nodes = refined_nodes;
    }
}

fn sum_on_grid<F>(
    spectrum: &SpectrumModel,
    half_range_sigmas: f64,
    nodes: usize,
    phase: &F,
    delay_multiplier: f64,
    delays: &[f64],
) -> Vec<Complex64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = spectrum.grid(half_range_sigmas, nodes);
    let weighted: Vec<(f64, Complex64)> = grid
        .detunings
        .iter()
        .zip(&grid.weights)
        .map(|(&w, &wt)| (w * delay_multiplier / SPEED_OF_LIGHT, Complex64::from_polar(wt, phase(w))))
        .collect();
    delays
        .par_iter()
        .map(|&x| {
            weighted
                .iter()
                .map(|&(k, a)| a * Complex64::cis(k * x))
                .sum()
        })
        .collect()
}

/// Normalized HOM dip shape: `Re Σ |g|² e^{i[φ(Ω)−φ(−Ω)]} e^{2iΩτ}`, equal to
/// one at zero delay without dispersion. Only the odd part of φ contributes.
pub fn hom_dip_numeric(
    spectrum: &SpectrumModel,
    dispersion: &DispersionProfile,
    delays: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<f64>, ModelError> {
    let odd = dispersion.odd_part();
    let values = spectral_sum(spectrum, quad, |w| 2.0 * odd.phase(w), 2.0, delays)?;
    Ok(values.into_iter().map(|v| v.re).collect())
}

/// Envelope and residual carrier phase of a single-photon interferogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub envelope: f64,
    pub phase: f64,
}

/// Complex degree of coherence `Σ |g|² e^{iφ(Ω)} e^{iΩτ}` returned as
/// envelope and phase.
pub fn classical_envelope_numeric(
    spectrum: &SpectrumModel,
    dispersion: &DispersionProfile,
    delays: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<Coherence>, ModelError> {
    Ok(degree_of_coherence(spectrum, dispersion, delays, quad)?
        .into_iter()
        .map(|g| Coherence {
            envelope: g.norm(),
            phase: g.arg(),
        })
        .collect())
}

pub(crate) fn degree_of_coherence(
    spectrum: &SpectrumModel,
    dispersion: &DispersionProfile,
    delays: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<Complex64>, ModelError> {
    spectral_sum(spectrum, quad, |w| dispersion.phase(w), 1.0, delays)
}

/// Dispersion-free dip shape `exp(−2σ²τ²)`, τ = delay/c.
pub fn dip_closed_form(spectrum: &SpectrumModel, delay: f64) -> f64 {
    let t = delay / SPEED_OF_LIGHT;
    let s = spectrum.sigma_omega();
    (-2.0 * s * s * t * t).exp()
}

/// Dispersion-free envelope `exp(−σ²τ²/2)`.
pub fn envelope_closed_form(spectrum: &SpectrumModel, delay: f64) -> f64 {
    let t = delay / SPEED_OF_LIGHT;
    let s = spectrum.sigma_omega();
    (-0.5 * s * s * t * t).exp()
}

/// FWHM (m of path) of the dispersion-free dip.
pub fn dip_fwhm_closed_form(spectrum: &SpectrumModel) -> f64 {
    SPEED_OF_LIGHT * (2.0 * std::f64::consts::LN_2).sqrt() / spectrum.sigma_omega()
}

/// FWHM (m of path) of the dispersion-free single-photon envelope.
pub fn envelope_fwhm_closed_form(spectrum: &SpectrumModel) -> f64 {
    2.0 * dip_fwhm_closed_form(spectrum)
}
