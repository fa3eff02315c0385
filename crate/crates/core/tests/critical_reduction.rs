use fkdv_core::reduction::{
    a1a2, alpha_window, b1_top_right, critical_power, critical_power_max, cubic_at, cubic_discriminant,
    cubic_from_eigenvalues, delta_constant_state, discriminant_scaling_check, gamma_coefficient,
    gamma_prefactor, i02_slope, predicted_classification, reduced_matrices_at_zero_xi, sigma, CriticalBasis,
    CubicVerdict, ReducedMatrices,
};
use fkdv_core::bloch::Classification;
use fkdv_core::wave::{family_derivatives, solve_wave, ModelParams, WaveOptions};
use num_complex::Complex64;
use proptest::prelude::*;

fn params(alpha: f64, p: f64) -> ModelParams {
    ModelParams::new(alpha, p).unwrap()
}

#[test]
fn critical_power_large_alpha() {
    assert!((critical_power(50.0) - 53.0 / 49.0).abs() < 1e-12);
    assert!((critical_power(1000.0) - 1.0).abs() < 0.005);
}

#[test]
fn window_endpoints_solve_the_curve() {
    let (lo, hi) = alpha_window(1.5).unwrap();
    assert!((critical_power(lo) - 1.5).abs() < 1e-8 && (critical_power(hi) - 1.5).abs() < 1e-8);
    let (alpha_star, p_max) = critical_power_max();
    let (lo, hi) = alpha_window(p_max - 1e-9).unwrap();
    assert!(lo < alpha_star && alpha_star < hi && hi - lo < 1e-3);
    assert!(alpha_window(1.0).is_err() && alpha_window(p_max + 0.01).is_err());
}

#[test]
fn gamma_roots_on_the_curve() {
    for alpha in [1.0, 1.5, 2.0, 3.0, 5.0] {
        let p = critical_power(alpha);
        assert!(gamma_coefficient(alpha, p).abs() / gamma_prefactor(alpha, p) < 1e-10);
    }
}

#[test]
fn a1a2_values() {
    assert_eq!(a1a2(2.0, 0.0), (0.0, 0.0, 0.0));
    let (a1, _, _) = a1a2(2.0, 0.1);
    assert!((a1 - 0.330).abs() < 1e-12);
    let xi = 1e-5;
    for alpha in [0.8, 2.0, 3.5] {
        let (a1, _, a2) = a1a2(alpha, xi);
        assert!((a1 / xi - (alpha + 1.0)).abs() < 1e-3);
        assert!((a2 / (xi * xi) - alpha * (alpha + 1.0)).abs() < 1e-3 * alpha * (alpha + 1.0));
    }
}

#[test]
fn constant_state_discriminant_is_nonnegative() {
    for (alpha, p, b) in [(2.0, 1.0, 0.0), (0.8, 2.0, 0.02), (3.0, 1.5, -0.01)] {
        for xi in [0.01, 0.1, 0.25, 0.5] {
            assert!(delta_constant_state(&params(alpha, p), b, xi).unwrap() >= 0.0);
        }
    }
    assert!(delta_constant_state(&params(2.0, 1.0), 0.0, 0.0).is_err());
}

#[test]
fn rayleigh_cubic_matches_closed_form() {
    for (alpha, p, b) in [(2.0, 1.0, 0.0), (1.5, 2.0, 0.02)] {
        let pr = params(alpha, p);
        for xi in [0.01, 0.05, 0.2, 0.4] {
            let c = ReducedMatrices::at_constant_state(&pr, b, xi).unwrap().cubic(p).unwrap();
            let want = delta_constant_state(&pr, b, xi).unwrap();
            assert!((c.discriminant - want).abs() <= 1e-9 * want, "{alpha} {p} {b} {xi}");
        }
    }
}

#[test]
fn cubic_verdict_from_root_shape() {
    let p = 1.0;
    let xi = 0.1;
    let on_axis = [0.1, -0.3, 0.7].map(|x| Complex64::new(0.0, p * xi * x));
    let c = cubic_from_eigenvalues(on_axis, p, xi).unwrap();
    assert_eq!(c.verdict, CubicVerdict::ThreeReal);
    assert!((c.discriminant - cubic_discriminant(c.d2, c.d1, c.d0)).abs() < 1e-15);
    let pair = [Complex64::new(0.0, 0.02), Complex64::new(0.01, -0.01), Complex64::new(-0.01, -0.01)];
    assert_eq!(cubic_from_eigenvalues(pair, p, xi).unwrap().verdict, CubicVerdict::ComplexPair);
    let lopsided = [Complex64::new(0.01, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.02)];
    assert!(cubic_from_eigenvalues(lopsided, p, xi).is_err());
}

#[test]
fn cubic_sign_in_unstable_kdv_case() {
    let w = solve_wave(params(2.0, 3.0), 0.05, 0.0, None).unwrap();
    let c = cubic_at(&w, 0.01, 32).unwrap();
    assert!(c.discriminant < 0.0 && gamma_coefficient(2.0, 3.0) < 0.0);
    assert_eq!(c.verdict, CubicVerdict::ComplexPair);
}

#[test]
fn cubic_verdict_agrees_away_from_curve() {
    let cases = [(2.0, 1.0), (2.0, 3.0), (3.0, 1.0), (1.5, 2.5), (4.0, 1.2)];
    for (alpha, p) in cases {
        assert!((p - critical_power(alpha)).abs() >= 0.2);
        let want = match predicted_classification(alpha, p) {
            Classification::Stable => CubicVerdict::ThreeReal,
            _ => CubicVerdict::ComplexPair,
        };
        for a in [0.03, 0.05] {
            let w = solve_wave(params(alpha, p), a, 0.0, None).unwrap();
            for xi in [0.005, 0.01] {
                let c = cubic_at(&w, xi, 32).unwrap();
                assert_eq!(c.verdict, want, "({alpha},{p}) a={a} xi={xi}: {c:?}");
            }
        }
    }
}

#[test]
fn reduced_matrices_at_zero_xi_structure() {
    let (alpha, p, a) = (2.0, 1.0, 0.02);
    let w = solve_wave(params(alpha, p), a, 0.0, None).unwrap();
    let d = family_derivatives(&w).unwrap();
    let r = reduced_matrices_at_zero_xi(&w, &d).unwrap();
    let s = sigma(&w, &d);
    assert!((s - p * (p + 1.0) * a).abs() < 10.0 * a * a * a);
    assert!((r.bmat[(1, 2)] - Complex64::new(s, 0.0)).norm() < 1e-8);
    for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)] {
        assert!(r.bmat[(i, j)].norm() < 1e-8, "B[{i}][{j}] = {}", r.bmat[(i, j)]);
    }
    assert!((r.imat[(0, 2)].re - i02_slope(alpha, p) * a).abs() < 10.0 * a * a);
    let basis = CriticalBasis::new(&w, &d);
    let dz = w.profile.derivative().scaled(-1.0 / a);
    assert!(basis.eta1.sub(&dz).norm() < 1e-12);
}

#[test]
fn discriminant_fit_matches_gamma() {
    let opts = WaveOptions::default();
    for (alpha, p) in [(2.0, 1.0), (2.0, 3.0)] {
        let r = discriminant_scaling_check(params(alpha, p), &[0.03, 0.05], 0.005, &opts).unwrap();
        assert!(r.gamma_passed && r.b1_passed, "{r:?}");
    }
    assert!((b1_top_right(2.0, 1.0).im - (2.0 + 1.0 / 3.0)).abs() < 1e-14);
}

#[test]
fn discriminant_check_rejects_bad_inputs() {
    let opts = WaveOptions::default();
    assert!(discriminant_scaling_check(params(2.0, 1.0), &[0.03], 0.005, &opts).is_err());
    assert!(discriminant_scaling_check(params(2.0, 1.0), &[0.03, 0.05], 0.2, &opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_sign_tracks_critical_power(alpha in 1.0001f64..10.0, p in 1.0f64..4.0) {
        let pstar = critical_power(alpha);
        prop_assume!((pstar - p).abs() > 1e-9);
        prop_assert_eq!(gamma_coefficient(alpha, p) > 0.0, pstar > p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cubic_coefficients_even(alpha in 1.2f64..4.0, p in 1.0f64..3.0, a in 0.02f64..0.08, xi in 0.02f64..0.3) {
        let pr = params(alpha, p);
        let w = solve_wave(pr, a, 0.0, None).unwrap();
        let m = solve_wave(pr, -a, 0.0, None).unwrap();
        let c = cubic_at(&w, xi, 24).unwrap();
        for other in [cubic_at(&w, -xi, 24).unwrap(), cubic_at(&m, xi, 24).unwrap()] {
            prop_assert!((c.d2 - other.d2).abs() <= 1e-8 * c.d2.abs().max(1.0));
            prop_assert!((c.d1 - other.d1).abs() <= 1e-8 * c.d1.abs().max(1.0));
            prop_assert!((c.d0 - other.d0).abs() <= 1e-8 * c.d0.abs().max(1.0));
        }
    }
}
