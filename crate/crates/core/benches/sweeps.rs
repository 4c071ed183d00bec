//! Sequential vs rayon execution for seed sweeps and for the per-Hom-set
//! corner decomposition of one large category. Build with
//! `--no-default-features` to see the fallback, where both modes coincide.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gelfand_core::cstarcat::decompose_with;
use gelfand_core::harness::gen::{gen_category, GenParams, PhaseMode, Scramble};
use gelfand_core::harness::sweep;
use gelfand_core::par::Exec;
use gelfand_core::Tolerance;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_seed_sweep(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("a_side_sweep");
    group.sample_size(10);
    for seeds in [16u64, 64] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, seeds), &seeds, |b, &seeds| {
                b.iter(|| {
                    sweep::run(exec, 0..seeds, |s| {
                        sweep::a_side(&GenParams::sampled(s, Scramble::Unitary), tol, Exec::Sequential).passed
                    })
                })
            });
        }
    }
    group.finish();
}

fn bench_corners(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("decompose");
    group.sample_size(10);
    for n_objects in [3usize, 5] {
        let p = GenParams {
            seed: 7,
            n_objects,
            max_base: 6,
            edge_density: 1.0,
            phase_mode: PhaseMode::Random,
            scramble: Scramble::Unitary,
        };
        let (cat, _) = gen_category(&p).expect("valid parameters");
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n_objects), &cat, |b, cat| {
                b.iter(|| decompose_with(black_box(cat), tol, exec).expect("decomposes"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_seed_sweep, bench_corners);
criterion_main!(benches);
