//! Sequential versus data-parallel execution of the heavy scans.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relfix::contraction::{verify_contraction_with, ContractionProblem, Potential, SelfMap};
use relfix::generate::{evaluate_batch, random_problem};
use relfix::relation::{is_transitive_with, BinaryRelation};
use relfix::simulation::{check_zeta_axioms_with, SampleSpec, SimulationFunction};
use relfix::space::{verify_bmetric_axioms_with, BMetricSpace, Metric};
use relfix::Strategy;

fn grid_space(n: usize) -> BMetricSpace {
    let values = (0..n).map(|i| i as f64 / n as f64).collect();
    BMetricSpace::new(values, Metric::SquaredDifference, 2.0).unwrap()
}

/// Descending map on a grid with the `>=` order and a steep potential.
fn grid_problem(n: usize) -> ContractionProblem {
    let space = grid_space(n);
    let relation = BinaryRelation::from_fn(n, |a, b| a.0 >= b.0);
    let map = SelfMap::from_indices((0..n).map(|i| i / 2).collect()).unwrap();
    let potential = Potential::new((0..n).map(|i| 10.0 * i as f64).collect()).unwrap();
    ContractionProblem::new(space, relation, map, potential, SimulationFunction::linear(0.9).unwrap()).unwrap()
}

fn bench_axioms(c: &mut Criterion) {
    let mut group = c.benchmark_group("bmetric_axioms");
    for n in [60, 160] {
        let space = grid_space(n);
        for &strategy in Strategy::AVAILABLE {
            group.bench_with_input(BenchmarkId::new(strategy.name(), n), &space, |b, space| {
                b.iter(|| verify_bmetric_axioms_with(black_box(space), 1e-12, strategy))
            });
        }
    }
    group.finish();
}

fn bench_transitivity(c: &mut Criterion) {
    let mut group = c.benchmark_group("transitivity");
    for n in [80, 200] {
        let relation = BinaryRelation::from_fn(n, |a, b| a.0 >= b.0 || (a.0 + b.0) % 7 == 0);
        for &strategy in Strategy::AVAILABLE {
            group.bench_with_input(BenchmarkId::new(strategy.name(), n), &relation, |b, r| {
                b.iter(|| is_transitive_with(black_box(r), strategy))
            });
        }
    }
    group.finish();
}

fn bench_ledger(c: &mut Criterion) {
    let mut group = c.benchmark_group("contraction_ledger");
    for n in [200, 800] {
        let problem = grid_problem(n);
        for &strategy in Strategy::AVAILABLE {
            group.bench_with_input(BenchmarkId::new(strategy.name(), n), &problem, |b, p| {
                b.iter(|| verify_contraction_with(black_box(p), 1e-9, strategy))
            });
        }
    }
    group.finish();
}

fn bench_zeta(c: &mut Criterion) {
    let mut group = c.benchmark_group("zeta_axioms");
    let zeta = SimulationFunction::scaled(0.5, 0.9).unwrap();
    let spec = SampleSpec::default();
    for &strategy in Strategy::AVAILABLE {
        group.bench_function(strategy.name(), |b| {
            b.iter(|| check_zeta_axioms_with(black_box(&zeta), &spec, strategy))
        });
    }
    group.finish();
}

fn bench_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("instance_batch");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let problems: Vec<_> = (0..200).map(|_| random_problem(&mut rng, 8)).collect();
    for &strategy in Strategy::AVAILABLE {
        group.bench_function(strategy.name(), |b| b.iter(|| evaluate_batch(black_box(&problems), strategy)));
    }
    group.finish();
}

criterion_group!(benches, bench_axioms, bench_transitivity, bench_ledger, bench_zeta, bench_batch);
criterion_main!(benches);
