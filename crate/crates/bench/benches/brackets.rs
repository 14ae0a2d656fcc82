use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use momenta_core::bracket::{BracketEngine, BracketRule};
use momenta_core::weyl::WeylOracle;
use momenta_core::{enumerate_moments, MomentIndex};

fn single_pairs(c: &mut Criterion) {
    let mut g = c.benchmark_group("bracket pair");
    let pairs = [
        ("G20,G02", [2, 0, 0, 0], [0, 2, 0, 0]),
        ("G30,G03", [3, 0, 0, 0], [0, 3, 0, 0]),
        ("G2101,G1012", [2, 1, 0, 1], [1, 0, 1, 2]),
    ];
    for rule in [BracketRule::Exact, BracketRule::Printed] {
        let e = BracketEngine::new(2, rule);
        for (name, a, b) in &pairs {
            let (a, b) = (MomentIndex::new(a), MomentIndex::new(b));
            g.bench_with_input(BenchmarkId::new(rule.to_string(), name), &(a, b), |bch, (a, b)| {
                bch.iter(|| e.moments(black_box(a), black_box(b)).unwrap())
            });
        }
    }
    g.finish();
}

fn all_pairs(c: &mut Criterion) {
    let ms = enumerate_moments(2, 3).unwrap();
    let e = BracketEngine::new(2, BracketRule::Exact);
    c.bench_function("all ordered pairs, 2 dofs, orders 2..3", |b| {
        b.iter(|| {
            for x in &ms {
                for y in &ms {
                    black_box(e.moments(x, y).unwrap());
                }
            }
        })
    });
}

fn oracle(c: &mut Criterion) {
    let o = WeylOracle::fitted(6).unwrap();
    let (a, b) = (MomentIndex::new(&[2, 1, 0, 1]), MomentIndex::new(&[1, 0, 1, 2]));
    c.bench_function("weyl oracle G2101,G1012", |bch| bch.iter(|| o.bracket(black_box(&a), black_box(&b)).unwrap()));
}

criterion_group!(benches, single_pairs, all_pairs, oracle);
criterion_main!(benches);
