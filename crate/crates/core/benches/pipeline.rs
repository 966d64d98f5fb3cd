//! Criterion benches comparing the sequential and parallel batch paths.
//!
//! `batch/*/sequential` always runs the plain iterator; `batch/*/parallel`
//! uses [`phdesc::parallel::par_map`], which is rayon under the default
//! `parallel` feature and identical to the sequential path without it, so
//! the same bench binary measures both configurations.
//!
//! Run with `cargo bench -p phdesc`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use phdesc::datagen::{generate, GeneratorConfig, GeneratorKind, PairPotential};
use phdesc::descriptor::{histogram, DimSet, GridSpec};
use phdesc::filtration::{build_rips, Convention};
use phdesc::geometry::PeriodicStructure;
use phdesc::parallel::{current_jobs, par_map, seq_map};
use phdesc::persistence::reduce;

fn structures(count: usize, n_atoms: usize) -> Vec<PeriodicStructure> {
    let potential = PairPotential::default();
    (0..count)
        .map(|i| {
            let config = GeneratorConfig {
                kind: GeneratorKind::PerturbedLattice {
                    sigma: 0.05 + 0.01 * (i % 20) as f64,
                },
                n_atoms,
                density: 2.0 + 0.1 * (i % 11) as f64,
                seed: i as u64,
            };
            generate(&config, &potential).expect("bench structure")
        })
        .collect()
}

fn diagram_of(structure: &PeriodicStructure) -> usize {
    let filtration = build_rips(structure, 3.0, Convention::SquaredRadius).unwrap();
    let diagram = reduce(&filtration).unwrap();
    diagram.pairs().len()
}

fn featurize_one(structure: &PeriodicStructure) -> f64 {
    let filtration = build_rips(structure, 3.0, Convention::SquaredRadius).unwrap();
    let diagram = reduce(&filtration).unwrap();
    let h = histogram(&diagram, GridSpec::default(), DimSet::h1_only());
    h.values().iter().sum()
}

fn bench_batch_pd(c: &mut Criterion) {
    let batch = structures(32, 64);
    let mut group = c.benchmark_group("batch_pd_64atom_x32");
    group.sample_size(10);
    group.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| seq_map(&batch, diagram_of))
    });
    group.bench_function(
        BenchmarkId::from_parameter(format!("parallel_{}_threads", current_jobs())),
        |b| b.iter(|| par_map(&batch, diagram_of)),
    );
    group.finish();
}

fn bench_batch_featurize(c: &mut Criterion) {
    let batch = structures(32, 64);
    let mut group = c.benchmark_group("batch_featurize_64atom_x32");
    group.sample_size(10);
    group.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(|| seq_map(&batch, featurize_one))
    });
    group.bench_function(
        BenchmarkId::from_parameter(format!("parallel_{}_threads", current_jobs())),
        |b| b.iter(|| par_map(&batch, featurize_one)),
    );
    group.finish();
}

fn bench_single_reduce(c: &mut Criterion) {
    let structure = structures(1, 216).pop().unwrap();
    let mut group = c.benchmark_group("reduce_216atom");
    group.sample_size(10);
    group.bench_function("rips_plus_reduce", |b| b.iter(|| diagram_of(&structure)));
    group.finish();
}

criterion_group!(benches, bench_batch_pd, bench_batch_featurize, bench_single_reduce);
criterion_main!(benches);
