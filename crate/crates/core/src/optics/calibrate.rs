//! Dispersion coefficients that reproduce observed interferogram widths.

use super::metrics::{curve_metrics, CurveMetrics};
use super::numeric::{
    classical_envelope_numeric, dip_fwhm_closed_form, envelope_fwhm_closed_form, hom_dip_numeric,
    QuadratureSpec,
};
use super::{DispersionProfile, ModelError, SpectrumModel};

const WIDTH_SAMPLES: usize = 4001;

/// Metrics of the numerically integrated dip for this dispersion.
pub fn dip_metrics(
    spectrum: &SpectrumModel,
    dispersion: &DispersionProfile,
    quad: &QuadratureSpec,
) -> Result<CurveMetrics, ModelError> {
    let mut half = 8.0 * dip_fwhm_closed_form(spectrum);
    loop {
        let xs = symmetric_grid(half, WIDTH_SAMPLES);
        let ys = hom_dip_numeric(spectrum, dispersion, &xs, quad)?;
        match curve_metrics(&xs, &ys) {
            Ok(m) if m.fwhm < 0.25 * half => return Ok(m),
            Ok(_) | Err(ModelError::NoHalfMaximum) if half < 1e-2 => half *= 2.0,
            Ok(_) => return Err(ModelError::NoHalfMaximum),
            Err(e) => return Err(e),
        }
    }
}

/// Metrics of the single-photon envelope |γ| for this dispersion.
pub fn envelope_metrics(
    spectrum: &SpectrumModel,
    dispersion: &DispersionProfile,
    quad: &QuadratureSpec,
) -> Result<CurveMetrics, ModelError> {
    let mut half = 4.0 * envelope_fwhm_closed_form(spectrum);
    loop {
        let xs = symmetric_grid(half, WIDTH_SAMPLES);
        let ys: Vec<f64> = classical_envelope_numeric(spectrum, dispersion, &xs, quad)?
            .into_iter()
            .map(|c| c.envelope)
            .collect();
        match curve_metrics(&xs, &ys) {
            Ok(m) if m.fwhm < 0.25 * half => return Ok(m),
            Ok(_) | Err(ModelError::NoHalfMaximum) if half < 1e-2 => half *= 2.0,
            Ok(_) => return Err(ModelError::NoHalfMaximum),
            Err(e) => return Err(e),
        }
    }
}

/// Third-order length product β₃L (s³) that widens the dip FWHM by
/// `broadening` (e.g. 1.19) relative to the dispersion-free dip.
pub fn cubic_for_dip_broadening(
    spectrum: &SpectrumModel,
    broadening: f64,
    quad: &QuadratureSpec,
) -> Result<f64, ModelError> {
    if !(broadening > 1.0) {
        return Err(ModelError::Domain(format!("broadening must exceed 1, got {broadening}")));
    }
    let base = dip_metrics(spectrum, &DispersionProfile::none(), quad)?.fwhm;
    let target = broadening * base;
    let s = spectrum.sigma_omega();
    // β₃L·σ³ of order one is a strong perturbation; start well below it.
    let scale = 0.1 / (s * s * s);
    let width = |b3: f64| -> Result<f64, ModelError> {
        let p = DispersionProfile::from_length_products(1.0, &[(3, b3)])?;
        Ok(dip_metrics(spectrum, &p, quad)?.fwhm)
    };
    bisect_increasing(width, scale, target)
}

/// Second-order length product β₂L (s²) that widens the envelope FWHM to
/// `target_fwhm` (m of path), keeping the other orders of `base`.
pub fn quadratic_for_envelope_fwhm(
    spectrum: &SpectrumModel,
    base: &DispersionProfile,
    target_fwhm: f64,
    quad: &QuadratureSpec,
) -> Result<f64, ModelError> {
    let start = envelope_metrics(spectrum, &base.with_length_product(2, 0.0)?, quad)?.fwhm;
    if !(target_fwhm > start) {
        return Err(ModelError::Domain(format!(
            "target envelope {target_fwhm} m is not wider than the unbroadened {start} m"
        )));
    }
    let s = spectrum.sigma_omega();
    let scale = 0.5 / (s * s);
    let width = |b2: f64| -> Result<f64, ModelError> {
        Ok(envelope_metrics(spectrum, &base.with_length_product(2, b2)?, quad)?.fwhm)
    };
    bisect_increasing(width, scale, target_fwhm)
}

/// Finds x ≥ 0 with f(x) = target for f increasing from f(0) < target.
fn bisect_increasing<F>(f: F, initial_step: f64, target: f64) -> Result<f64, ModelError>
where
    F: Fn(f64) -> Result<f64, ModelError>,
{
    let mut lo = 0.0;
    let mut hi = initial_step;
    let mut expansions = 0;
    while f(hi)? < target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 40 {
            return Err(ModelError::Domain("calibration target out of reach".into()));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn symmetric_grid(half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect()
}
