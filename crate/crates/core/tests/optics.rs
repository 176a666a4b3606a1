use qoct_core::optics::{
    classical_envelope_numeric, cubic_for_dip_broadening, curve_metrics, dip_fwhm_closed_form,
    dip_metrics, envelope_metrics, hom_dip_numeric, quadratic_for_envelope_fwhm, reference_dispersion,
    DispersionProfile, QuadratureSpec, SpectrumModel, REFERENCE_BETA2_L, REFERENCE_BETA3_L,
    SPEED_OF_LIGHT,
};

fn reference() -> SpectrumModel {
    SpectrumModel::new(1560e-9, 44e-9).unwrap()
}

fn grid(half: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect()
}

/// Plain midpoint rule over ±8σ of the Gaussian density, written out here so
/// it shares no code with the library quadrature.
fn brute_force_dip(sigma: f64, beta3_l: f64, delay: f64) -> f64 {
    let n = 20_000;
    let h = 16.0 * sigma / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..n {
        let w = -8.0 * sigma + (j as f64 + 0.5) * h;
        let rho = (-w * w / (2.0 * sigma * sigma)).exp();
        // φ(Ω) − φ(−Ω) for a pure cubic term is 2·β₃L·Ω³/6.
        let phase = 2.0 * beta3_l * w.powi(3) / 6.0 + 2.0 * w * delay / SPEED_OF_LIGHT;
        num += rho * phase.cos();
        den += rho;
    }
    num / den
}

#[test]
fn dip_shape_matches_an_independent_integral() {
    let s = reference();
    let xs = grid(60e-6, 121);
    let quad = QuadratureSpec::default();
    for b3 in [0.0, REFERENCE_BETA3_L] {
        let p = DispersionProfile::from_length_products(1.0, &[(3, b3)]).unwrap();
        let lib = hom_dip_numeric(&s, &p, &xs, &quad).unwrap();
        for (x, v) in xs.iter().zip(&lib) {
            let oracle = brute_force_dip(s.sigma_omega(), b3, *x);
            assert!((v - oracle).abs() < 1e-8, "β₃L {b3:e}, {x:e}: {v} vs {oracle}");
        }
    }
}

#[test]
fn reference_dispersion_constants_reproduce() {
    let s = reference();
    let quad = QuadratureSpec::default();
    let b3 = cubic_for_dip_broadening(&s, 1.19, &quad).unwrap();
    assert!((b3 / REFERENCE_BETA3_L - 1.0).abs() < 1e-6, "{b3:e}");
    let cubic = DispersionProfile::from_length_products(1.0, &[(3, REFERENCE_BETA3_L)]).unwrap();
    let b2 = quadratic_for_envelope_fwhm(&s, &cubic, 134e-6, &quad).unwrap();
    assert!((b2 / REFERENCE_BETA2_L - 1.0).abs() < 1e-6, "{b2:e}");

    let full = reference_dispersion(0.5).unwrap();
    let env = envelope_metrics(&s, &full, &quad).unwrap();
    assert!((env.fwhm - 134e-6).abs() < 0.05e-6, "{}", env.fwhm);
    let dip = dip_metrics(&s, &full, &quad).unwrap();
    let bare = dip_metrics(&s, &DispersionProfile::none(), &quad).unwrap();
    assert!((dip.fwhm / bare.fwhm - 1.19).abs() < 1e-4);
}

#[test]
fn dip_area_survives_any_phase() {
    let s = reference();
    let quad = QuadratureSpec::default();
    let bare = dip_metrics(&s, &DispersionProfile::none(), &quad).unwrap();
    for products in [
        vec![(3, REFERENCE_BETA3_L)],
        vec![(2, REFERENCE_BETA2_L), (3, REFERENCE_BETA3_L)],
        vec![(3, 2.0 * REFERENCE_BETA3_L), (4, 1e-52)],
        vec![(5, 1e-66)],
    ] {
        let p = DispersionProfile::from_length_products(0.5, &products).unwrap();
        let m = dip_metrics(&s, &p, &quad).unwrap();
        let ratio = m.dip_area / bare.dip_area;
        assert!((ratio - 1.0).abs() < 0.005, "{products:?}: {ratio}");
    }
}

#[test]
fn dip_ignores_the_even_part() {
    let s = reference();
    let xs = grid(80e-6, 161);
    let quad = QuadratureSpec::default();
    let odd = DispersionProfile::from_length_products(0.5, &[(3, REFERENCE_BETA3_L)]).unwrap();
    let mixed = reference_dispersion(0.5).unwrap();
    let a = hom_dip_numeric(&s, &odd, &xs, &quad).unwrap();
    let b = hom_dip_numeric(&s, &mixed, &xs, &quad).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-9);
    }
}

#[test]
fn envelope_width_is_reciprocal_to_bandwidth() {
    let quad = QuadratureSpec::default();
    let none = DispersionProfile::none();
    let narrow = envelope_metrics(&reference(), &none, &quad).unwrap().fwhm;
    let wide = envelope_metrics(&SpectrumModel::new(1560e-9, 88e-9).unwrap(), &none, &quad).unwrap().fwhm;
    assert!((narrow / wide - 2.0).abs() < 0.02, "{narrow:e} {wide:e}");
    // The dispersion-free envelope is twice as wide as the dip.
    assert!((narrow / dip_fwhm_closed_form(&reference()) - 2.0).abs() < 1e-3);
}

#[test]
fn envelope_grows_with_quadratic_dispersion() {
    let s = reference();
    let quad = QuadratureSpec::default();
    let mut last = 0.0;
    for k in 0..=6 {
        let b2 = REFERENCE_BETA2_L * k as f64 / 4.0;
        let p = DispersionProfile::from_length_products(0.5, &[(2, b2)]).unwrap();
        let w = envelope_metrics(&s, &p, &quad).unwrap().fwhm;
        assert!(w > last, "β₂L {b2:e}: {w:e} after {last:e}");
        last = w;
    }
}

#[test]
fn quadratic_phase_keeps_the_envelope_centered() {
    let s = reference();
    let quad = QuadratureSpec::default();
    let xs = grid(100e-6, 2001);
    let even = DispersionProfile::from_length_products(0.5, &[(2, REFERENCE_BETA2_L)]).unwrap();
    let env: Vec<f64> = classical_envelope_numeric(&s, &even, &xs, &quad)
        .unwrap()
        .into_iter()
        .map(|c| c.envelope)
        .collect();
    let m = curve_metrics(&xs, &env).unwrap();
    assert!(m.extremum_position.abs() < 0.2e-6);
    // A pure phase spreads the packet, so its peak drops.
    assert!(m.extremum_visibility < 1.0);
}
