use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use momenta_core::scenarios::Scenario;
use momenta_core::{generate, integrate, BracketRule, ClassicalModel, IntegratorConfig, Method};

fn derive(c: &mut Criterion) {
    let model = ClassicalModel::hydrogen();
    let mut g = c.benchmark_group("generate hydrogen");
    g.sample_size(10);
    for order in [2, 3, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, &n| {
            b.iter(|| generate(&model, n, BracketRule::Exact).unwrap())
        });
    }
    g.finish();
}

fn run(c: &mut Criterion) {
    let s = Scenario::perturbed_orbit(0.01);
    let system = s.system().unwrap();
    let ic = s.initial_state().unwrap();
    let mut g = c.benchmark_group("integrate order-2 orbit to t = 2");
    g.sample_size(20);
    for method in [Method::Dopri5, Method::Rk4] {
        let cfg = IntegratorConfig {
            method,
            t_end: 2.0,
            initial_step: 1e-3,
            ..s.integrator.clone()
        };
        g.bench_function(method.to_string(), |b| {
            b.iter(|| integrate(&system, &ic.state, &s.params(), s.hbar, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, derive, run);
criterion_main!(benches);
