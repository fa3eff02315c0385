use fkdv_core::torus::RealPeriodicFunction;
use fkdv_core::wave::{
    equilibrium, family_derivatives, k1_coefficient, second_order_profile, solve_wave, solve_wave_with,
    validate_expansions, ModelParams, WaveOptions, PROFILE_ORDER_MIN, WAVENUMBER_ORDER_MIN,
};
use fkdv_core::Error;
use proptest::prelude::*;

fn params(alpha: f64, p: f64) -> ModelParams {
    ModelParams::new(alpha, p).unwrap()
}

#[test]
fn rejects_small_alpha_with_message() {
    let err = ModelParams::new(0.4, 1.0).unwrap_err();
    assert!(err.to_string().contains("alpha must exceed 1/2"), "{err}");
    assert!(ModelParams::new(2.0, 0.5).is_err());
}

#[test]
fn equilibrium_quadratic_root() {
    let q = equilibrium(&params(2.0, 1.0), 0.01).unwrap();
    let want = (1.0 + (1.04f64).sqrt()) / 2.0;
    assert!((q - want).abs() < 1e-14);
}

#[test]
fn equilibrium_expansion_is_third_order() {
    let pr = params(2.0, 2.0);
    let err = |b: f64| (equilibrium(&pr, b).unwrap() - (1.0 + b / 2.0 - 3.0 * b * b / 8.0)).abs();
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 8.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn bifurcation_point_is_constant() {
    for (alpha, p) in [(2.0, 1.0), (1.5, 2.0), (0.8, 3.0)] {
        let w = solve_wave(params(alpha, p), 0.0, 0.0, None).unwrap();
        assert!((w.wavenumber_alpha - p).abs() < 1e-14);
        assert!((w.profile.coeff(0).re - 1.0).abs() < 1e-14);
        assert!(w.profile.coeffs().iter().enumerate().all(|(i, c)| i == w.truncation() || c.norm() == 0.0));
    }
}

#[test]
fn kdv_wavenumber_correction() {
    let pr = params(2.0, 1.0);
    assert!((k1_coefficient(&pr) + 5.0 / 6.0).abs() < 1e-14);
    let e = |a: f64| {
        let w = solve_wave(pr, a, 0.0, None).unwrap();
        (w.wavenumber_alpha - 1.0 + 5.0 / 6.0 * a * a).abs()
    };
    let ratio = e(0.1) / e(0.05);
    assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
}

#[test]
fn second_mode_matches_expansion() {
    let a = 0.05;
    let w = solve_wave(params(2.0, 1.0), a, 0.0, None).unwrap();
    let want = a * a / 12.0;
    assert!((w.profile.coeff(2).re - want).abs() < 0.01 * want);
    assert!((second_order_profile(&params(2.0, 1.0), 8).coeff(2).re - 1.0 / 12.0).abs() < 1e-15);
}

#[test]
fn half_period_shift() {
    let pr = params(2.0, 2.0);
    let w = solve_wave(pr, 0.08, 0.01, None).unwrap();
    let m = solve_wave(pr, -0.08, 0.01, None).unwrap();
    let shifted = w.profile.shifted(std::f64::consts::PI);
    let diff = shifted.sub(&m.profile).coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-10, "{diff}");
    assert!((w.wavenumber_alpha - m.wavenumber_alpha).abs() < 1e-12);
}

#[test]
fn expansion_validator_orders() {
    let opts = WaveOptions::default();
    for (alpha, p) in [(2.0, 1.0), (2.0, 2.0), (1.5, 1.0)] {
        let r = validate_expansions(params(alpha, p), &[0.02, 0.04, 0.08], &opts).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.profile_order >= PROFILE_ORDER_MIN && r.wavenumber_order >= WAVENUMBER_ORDER_MIN);
        // E₂(a)/a² → 0
        let ratios: Vec<f64> = r.rows.iter().map(|row| row.profile_error / (row.a * row.a)).collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2]);
    }
}

#[test]
fn fractional_power_waves() {
    let w = solve_wave(params(2.0, 1.5), 0.1, 0.02, None).unwrap();
    assert!(w.profile_residual().unwrap() < 1e-10);
    assert!(w.profile.min_value(256) > 0.5);
}

#[test]
fn out_of_range_amplitude_is_rejected() {
    let r = solve_wave(params(2.0, 1.0), 0.5, 0.0, None);
    assert!(matches!(r, Err(Error::InvalidParameter(_))), "{r:?}");
}

#[test]
fn derivative_identities_along_family() {
    for (alpha, p, a, b) in [(2.0, 1.0, 0.05, 0.0), (3.0, 2.0, 0.1, 0.01), (0.8, 1.0, 0.05, -0.01)] {
        let w = solve_wave(params(alpha, p), a, b, None).unwrap();
        let d = family_derivatives(&w).unwrap();
        let (ra, rb) = d.residuals(&w).unwrap();
        assert!(ra < 1e-8 && rb < 1e-8, "{ra} {rb}");
        // ∂_z P is odd and k^α is even in a
        assert!(d.dp_dz.coeffs().iter().all(|c| c.re.abs() < 1e-14));
        let m = solve_wave(params(alpha, p), -a, b, None).unwrap();
        let dm = family_derivatives(&m).unwrap();
        assert!((d.dk_alpha_da + dm.dk_alpha_da).abs() < 1e-8);
    }
}

#[test]
fn derivatives_at_bifurcation_point() {
    let p = 2.0;
    let w = solve_wave(params(2.0, p), 0.0, 0.0, None).unwrap();
    let d = family_derivatives(&w).unwrap();
    let cos = RealPeriodicFunction::cosine(1.0, 1, w.truncation());
    assert!(d.dp_da.sub(&cos).norm() < 1e-12);
    assert!(d.dk_alpha_da.abs() < 1e-14);
    assert!((d.dp_db.coeff(0).re - 1.0 / p).abs() < 1e-12);
    assert!((d.dk_alpha_db - (p + 1.0)).abs() < 1e-12);
}

#[test]
fn truncation_is_configurable() {
    let w = solve_wave_with(params(2.0, 1.0), 0.1, 0.0, None, &WaveOptions::with_truncation(12)).unwrap();
    assert_eq!(w.truncation(), 12);
    let big = solve_wave_with(params(2.0, 1.0), 0.1, 0.0, None, &WaveOptions::with_truncation(40)).unwrap();
    assert!((w.wavenumber_alpha - big.wavenumber_alpha).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solution_invariants(alpha in 0.7f64..5.0, p in 1.0f64..3.0, a in -0.15f64..0.15, b in -0.03f64..0.03) {
        let w = solve_wave(params(alpha, p), a, b, None).unwrap();
        prop_assert!(w.wavenumber_alpha > 0.0);
        prop_assert!(w.residual_norm <= 1e-10);
        prop_assert!(w.profile.odd_part_size() <= 1e-10);
        prop_assert!((w.profile.coeff(1).re - a / 2.0).abs() <= 1e-14);
        prop_assert!((w.profile.coeff(-1).re - a / 2.0).abs() <= 1e-14);
    }

    #[test]
    fn parity_in_amplitude(alpha in 0.7f64..5.0, p in 1.0f64..3.0, a in 0.01f64..0.15) {
        let pr = params(alpha, p);
        let w = solve_wave(pr, a, 0.0, None).unwrap();
        let m = solve_wave(pr, -a, 0.0, None).unwrap();
        prop_assert!((w.wavenumber_alpha - m.wavenumber_alpha).abs() <= 1e-12);
        for n in 0..=6i64 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((w.profile.coeff(n).re - sign * m.profile.coeff(n).re).abs() <= 1e-12);
        }
    }

    #[test]
    fn coefficient_decay(alpha in 0.7f64..5.0, p in 1.0f64..3.0) {
        let pr = params(alpha, p);
        let a0 = 0.02;
        let w1 = solve_wave(pr, a0, 0.0, None).unwrap();
        let w2 = solve_wave(pr, 2.0 * a0, 0.0, None).unwrap();
        for n in [2i64, 3] {
            let ratio = w2.profile.coeff(n).re.abs() / w1.profile.coeff(n).re.abs();
            let want = 2f64.powi(n as i32);
            prop_assert!((ratio - want).abs() <= 0.2 * want, "n={} ratio={}", n, ratio);
        }
    }
}
