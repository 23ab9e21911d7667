use criterion::{criterion_group, criterion_main, Criterion};
use sharpineq_core::profiles::{gn_extremal, normalize, sobolev_extremal};
use sharpineq_core::quadrature::monte_carlo_sigma;
use sharpineq_core::transport::radial_brenier;
use sharpineq_core::verifier::{gn_quotients, sobolev_quotient, VERIFY_TOL};
use sharpineq_core::{NormSpec, RadialProfile, Shape, WeightedDomain, DEFAULT_SEED};

fn quotients(c: &mut Criterion) {
    let d = WeightedDomain::half_space(2, 1.0, NormSpec::euclidean(2)).unwrap();
    let h = sobolev_extremal(&d, 2.0).unwrap();
    c.bench_function("sobolev quotient", |b| b.iter(|| sobolev_quotient(&d, 2.0, &h, VERIFY_TOL).unwrap()));
    let g = gn_extremal(&d, 2.0, 0.5).unwrap();
    c.bench_function("gn quotients", |b| b.iter(|| gn_quotients(&d, 2.0, 0.5, &g, VERIFY_TOL).unwrap()));

    let source = normalize(&d, &g, 1.0, 1e-13).unwrap();
    let target = normalize(&d, &RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 }), 1.0, 1e-13).unwrap();
    c.bench_function("radial brenier map", |b| b.iter(|| radial_brenier(&d, &source, &target).unwrap()));

    let f = |z: &[f64]| (-(z[0] * z[0] + z[1] * z[1])).exp();
    let mut group = c.benchmark_group("monte carlo");
    group.sample_size(10);
    group.bench_function("1e5 samples", |b| b.iter(|| monte_carlo_sigma(&d, &f, 100_000, DEFAULT_SEED).unwrap()));
    group.finish();
}

criterion_group!(benches, quotients);
criterion_main!(benches);
