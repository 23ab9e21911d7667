use std::f64::consts::PI;

use proptest::prelude::*;
use sharpineq_core::constants::sobolev_constant;
use sharpineq_core::profiles::sobolev_extremal;
use sharpineq_core::quadrature::monte_carlo_sigma;
use sharpineq_core::verifier::{sobolev_quotient, VERIFY_TOL};
use sharpineq_core::{NormSpec, RadialProfile, Shape, WeightedDomain, DEFAULT_SEED};

fn dom(n: usize, a: f64) -> WeightedDomain {
    WeightedDomain::half_space(n, a, NormSpec::euclidean(n)).unwrap()
}

#[test]
fn l1_ball_measure_against_direct_integral_and_monte_carlo() {
    // 2∫₀¹ t(1 − t) dt
    let d = WeightedDomain::half_space(2, 1.0, NormSpec::lq(1.0, 2).unwrap()).unwrap();
    assert!((d.ball_measure() - 1.0 / 3.0).abs() < 1e-14);
    let inside = |z: &[f64]| if z[0].abs() + z[1] <= 1.0 { 1.0 } else { 0.0 };
    let mc = monte_carlo_sigma(&d, &inside, 200_000, DEFAULT_SEED).unwrap();
    assert!((mc.estimate - 1.0 / 3.0).abs() < 3.0 * mc.std_error, "{mc:?}");
}

#[test]
fn perimeter_is_n_a_times_volume() {
    for (n, a) in [(2, 1.0), (3, 2.0), (2, 0.5)] {
        let d = dom(n, a);
        let want = d.n_a() * d.ball_measure();
        assert!((d.ball_perimeter() - want).abs() < 1e-12 * want);
        let surface = d.surface_perimeter_quadrature(1e-9).unwrap();
        assert!((surface - want).abs() < 1e-6 * want, "({n}, {a}): {surface} vs {want}");
    }
}

#[test]
fn three_dimensional_half_space_constant_is_classical() {
    // Talenti's constant on ℝ³ gains a factor 2^{1/3} on the half space
    let talenti = (4.0 / PI.sqrt()).cbrt() / (3.0 * PI).sqrt();
    let s = sobolev_constant(&dom(3, 0.0), 2.0).unwrap().value();
    assert!((s / (2f64.cbrt() * talenti) - 1.0).abs() < 1e-12, "{s}");
    // h = (1 + r²)^{−1/2} on a half sphere of area 2π:
    // ∫ r⁴(1 + r²)^{−3} = 3π/16 and ∫ r²(1 + r²)^{−3} = π/16
    let grad = (2.0 * PI * 3.0 * PI / 16.0).sqrt();
    let mass = (2.0 * PI * PI / 16.0).powf(1.0 / 6.0);
    assert!((s * grad / mass - 1.0).abs() < 1e-12);
}

#[test]
fn monte_carlo_agrees_with_radial_reduction() {
    let d = dom(2, 1.0);
    let g = RadialProfile::new(Shape::Power { shift: 1.0, q: 2.0, exponent: 4.0 });
    let exact = d.radial_integral(&g, 0.0, 1e-12).unwrap();
    let f = |z: &[f64]| (1.0 + z[0] * z[0] + z[1] * z[1]).powi(-4);
    let mc = monte_carlo_sigma(&d, &f, 400_000, DEFAULT_SEED).unwrap();
    assert!((mc.estimate - exact).abs() < 3.0 * mc.std_error, "{mc:?} vs {exact}");
}

#[test]
fn extremals_close_the_inequality() {
    for (n, a, p) in [(1, 0.5, 1.2), (2, 1.0, 2.0), (3, 2.0, 3.0), (3, 0.0, 1.5)] {
        let d = dom(n, a);
        let h = sobolev_extremal(&d, p).unwrap();
        let r = sobolev_quotient(&d, p, &h, VERIFY_TOL).unwrap();
        assert!(r.deficit.abs() < 1e-8, "({n}, {a}, {p}): {}", r.deficit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_profiles_never_beat_the_constant(shift in 0.1f64..5.0, q in 1.2f64..3.0, decay in 0.6f64..3.0) {
        let d = dom(2, 1.0);
        let f = RadialProfile::new(Shape::Power { shift, q, exponent: decay / q });
        let r = sobolev_quotient(&d, 2.0, &f, VERIFY_TOL).unwrap();
        prop_assert!(r.deficit >= -1e-8, "{}", r.deficit);
    }
}
