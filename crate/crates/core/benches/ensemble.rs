use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use facerot::continuum::{ScalarSeries, Trig};
use facerot::exact::{verify_invariance, Mutation};
use facerot::exec::Execution;
use facerot::fields::{hodge_decompose, DiscreteVectorField};
use facerot::lattice::Torus;
use facerot::sim::{SimConfig, Simulator};
use num_rational::Rational64;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ensemble(c: &mut Criterion) {
    let profile = ScalarSeries::constant(0.5).with_wave(0.25, [1, 0], Trig::Sin);
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for n in [16, 32] {
        let mut cfg = SimConfig::new(n, 0.02, 0.5, profile.clone());
        cfg.ensemble_size = 8;
        let sim = Simulator::new(cfg).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
                b.iter(|| sim.map_ensemble(exec, |t| t.events).unwrap())
            });
        }
    }
    group.finish();
}

fn exact_invariance(c: &mut Criterion) {
    let mut group = c.benchmark_group("invariance_n4");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| verify_invariance(4, Rational64::new(1, 2), Mutation::None, exec).unwrap())
        });
    }
    group.finish();
}

fn hodge(c: &mut Criterion) {
    let torus = Torus::new(64).unwrap();
    let phi = DiscreteVectorField::from_canonical(
        &torus,
        (0..torus.num_edges()).map(|k| ((k * 37 % 101) as f64).sin()).collect(),
    )
    .unwrap();
    c.bench_function("hodge_decompose_64", |b| {
        b.iter(|| hodge_decompose(&torus, &phi).unwrap())
    });
}

criterion_group!(benches, ensemble, exact_invariance, hodge);
criterion_main!(benches);
