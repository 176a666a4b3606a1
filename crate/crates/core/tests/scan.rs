use qoct_core::optics::{
    ClassicalCurveModel, DispersionProfile, QuadratureSpec, QuantumCurveModel, RateCurve, SpectrumModel,
};
use qoct_core::scan::{
    build_scan_plan, calibrate_rates, derive_seed, simulate_core_pair, simulate_scan, Channel, Core,
    CoreCurves, DualCoreScenario, NoiseConfig, ScanPlan,
};

struct Constant(f64);

impl RateCurve for Constant {
    fn rate(&self, _delay: f64) -> f64 {
        self.0
    }
}

struct Ramp;

impl RateCurve for Ramp {
    fn rate(&self, delay: f64) -> f64 {
        2000.0 + 1e6 * delay
    }
}

fn long_plan() -> ScanPlan {
    // 10 001 points at 0.24 µm.
    build_scan_plan(0.0, 2400e-6, 0.24e-6, 1.0).unwrap()
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn poisson_counts_have_matching_mean_and_variance() {
    let plan = long_plan();
    let noise = NoiseConfig {
        position_jitter_sigma: 0.0,
        ..NoiseConfig::default()
    };
    let i0 = 400.0;
    let rec = simulate_scan(&Constant(i0), &plan, &noise, 7, Channel::Singles, Core::Core1).unwrap();
    assert_eq!(rec.len(), 10_001);
    let (mean, var) = mean_var(rec.counts.iter().map(|&c| c as f64));
    let n = rec.len() as f64;
    assert!((mean - i0).abs() < 3.0 * (i0 / n).sqrt(), "mean {mean}");
    let dispersion = var / mean;
    assert!((0.95..=1.05).contains(&dispersion), "var/mean {dispersion}");
}

#[test]
fn pooled_standardized_residuals_are_unit_normal() {
    let plan = long_plan();
    let noise = NoiseConfig::default();
    let rec = simulate_scan(&Ramp, &plan, &noise, 11, Channel::Singles, Core::Core1).unwrap();
    // The ramp is linear, so the rate at the recorded (true) position is exact.
    let z = rec.counts.iter().zip(&rec.positions).map(|(&c, &p)| {
        let mu = Ramp.rate(p);
        (c as f64 - mu) / mu.sqrt()
    });
    let (mean, var) = mean_var(z);
    let n = rec.len() as f64;
    assert!(mean.abs() < 5.0 / n.sqrt(), "mean {mean}");
    // Sample variance of n unit normals has sd ≈ √(2/n).
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "var {var}");
}

#[test]
fn jitter_has_the_configured_spread() {
    let plan = long_plan();
    let noise = NoiseConfig::default();
    let rec = simulate_scan(&Constant(10.0), &plan, &noise, 3, Channel::Singles, Core::Core1).unwrap();
    let offsets = rec
        .positions
        .iter()
        .zip(plan.commanded_positions())
        .map(|(p, c)| p - c);
    let (_, var) = mean_var(offsets);
    let ratio = var.sqrt() / noise.position_jitter_sigma;
    assert!((ratio - 1.0).abs() < 0.05, "std ratio {ratio}");
    assert!(rec.positions.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn commanded_position_mode_records_the_grid() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    let noise = NoiseConfig {
        estimator_sees_true_positions: false,
        ..NoiseConfig::default()
    };
    let rec = simulate_scan(&Constant(10.0), &plan, &noise, 3, Channel::Singles, Core::Core1).unwrap();
    for (p, c) in rec.positions.iter().zip(plan.commanded_positions()) {
        assert!((p - c).abs() < 1e-17);
    }
}

fn curves(plan: &ScanPlan, noise: &NoiseConfig) -> (impl RateCurve, impl RateCurve) {
    let spectrum = SpectrumModel::new(1560e-9, 44e-9).unwrap();
    let q = QuantumCurveModel::new(spectrum, 1.0, 0.74, 1.0, DispersionProfile::none()).unwrap();
    let c = ClassicalCurveModel::new(spectrum, 1.0, 0.5, DispersionProfile::none()).unwrap();
    let quad = QuadratureSpec::default();
    let range = (-200e-6, 200e-6);
    let pq = q.prepare(range, 5e-9, &quad).unwrap();
    let pc = c.prepare(range, 5e-9, &quad).unwrap();
    calibrate_rates(&pq, &pc, noise, plan).unwrap()
}

#[test]
fn coincidence_peak_is_one_percent_of_singles_peak() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    let noise = NoiseConfig::default();
    let (q, c) = curves(&plan, &noise);
    let dense = |curve: &dyn RateCurve| {
        (0..=120_000)
            .map(|i| curve.rate(-60e-6 + i as f64 * 1e-9))
            .fold(0.0, f64::max)
    };
    let (pq, pc) = (dense(&q), dense(&c));
    assert!((pc / noise.singles_peak_rate - 1.0).abs() < 1e-6, "{pc}");
    assert!((pq / pc - 0.01).abs() < 1e-8, "{}", pq / pc);
}

#[test]
fn simulation_is_deterministic() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    let noise = NoiseConfig::default();
    let (q, c) = curves(&plan, &noise);
    let scenario = DualCoreScenario::new(41.1e-6, 0.5).unwrap();
    let run = |seed| {
        simulate_core_pair(
            &scenario,
            CoreCurves {
                singles: &c,
                coincidences: &q,
            },
            &plan,
            &noise,
            seed,
        )
        .unwrap()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5).core1.singles.counts, run(6).core1.singles.counts);
}

#[test]
fn zero_offset_cores_are_independent_draws_of_the_same_law() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    let noise = NoiseConfig::noiseless(5e4);
    let (q, c) = curves(&plan, &noise);
    let scenario = DualCoreScenario::new(0.0, 0.5).unwrap();
    let pair = simulate_core_pair(
        &scenario,
        CoreCurves {
            singles: &c,
            coincidences: &q,
        },
        &plan,
        &noise,
        1,
    )
    .unwrap();
    assert_eq!(pair.core1.singles.counts, pair.core2.singles.counts);
    assert_eq!(pair.core1.coincidences.counts, pair.core2.coincidences.counts);
    assert_eq!(pair.core1.singles.positions, pair.core2.singles.positions);
}

#[test]
fn core2_is_core1_translated() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    let noise = NoiseConfig::noiseless(5e4);
    let (q, c) = curves(&plan, &noise);
    let dt = 41.1e-6;
    let scenario = DualCoreScenario::new(dt, 0.5).unwrap();
    let pair = simulate_core_pair(
        &scenario,
        CoreCurves {
            singles: &c,
            coincidences: &q,
        },
        &plan,
        &noise,
        9,
    )
    .unwrap();
    assert!(!pair.dip_outside_window);
    let plan2 = plan.with_center(dt);
    for (i, p) in plan2.commanded_positions().into_iter().enumerate() {
        let expect_c = (c.rate(p - dt) * plan.integration_time).round() as u64;
        let expect_q = (q.rate(p - dt) * plan.integration_time).round() as u64;
        assert_eq!(pair.core2.singles.counts[i], expect_c);
        assert_eq!(pair.core2.coincidences.counts[i], expect_q);
    }
    // Same commanded offsets, same relative positions.
    for (a, b) in pair.core1.singles.positions.iter().zip(&pair.core2.singles.positions) {
        assert!((b - a - dt).abs() < 1e-15);
    }
}

#[test]
fn far_offset_raises_the_window_flag() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    let noise = NoiseConfig::noiseless(5e4);
    let (q, c) = curves(&plan, &noise);
    let mut scenario = DualCoreScenario::new(41.1e-6, 0.5).unwrap();
    scenario.core2_scan_center = Some(-30e-6);
    let pair = simulate_core_pair(
        &scenario,
        CoreCurves {
            singles: &c,
            coincidences: &q,
        },
        &plan,
        &noise,
        9,
    )
    .unwrap();
    assert!(pair.dip_outside_window);
}

#[test]
fn derived_seeds_are_distinct() {
    let mut seeds: Vec<u64> = (0..10_000).map(|i| derive_seed(42, i)).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 10_000);
    assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
}

#[test]
fn invalid_noise_is_rejected() {
    let plan = build_scan_plan(0.0, 120e-6, 0.24e-6, 0.5).unwrap();
    for noise in [
        NoiseConfig {
            position_jitter_sigma: -1e-9,
            ..NoiseConfig::default()
        },
        NoiseConfig {
            coincidence_to_singles_ratio: 0.0,
            ..NoiseConfig::default()
        },
        NoiseConfig {
            coincidence_to_singles_ratio: 1.5,
            ..NoiseConfig::default()
        },
    ] {
        assert!(simulate_scan(&Constant(1.0), &plan, &noise, 0, Channel::Singles, Core::Core1).is_err());
    }
}
