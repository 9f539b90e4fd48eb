//! Wall-time benchmarks for the three samplers on the registry models.
//!
//! Each iteration simulates from a fresh per-iteration stream, so the
//! distributions match the Monte Carlo harness in `pdmp_core::bench`.

use criterion::{criterion_group, criterion_main, Criterion};
use pdmp_bench::{bench_config, fixture};
use pdmp_core::{chv_simulate, fjm_simulate, tjm_event_simulate, ChvOptions, ExpStream};

const BASE_SEED: u64 = 77;

fn example3_one_jump(c: &mut Criterion) {
    let (model, bound) = fixture("example3");
    let bound = bound.expect("example3 has a bound");
    let config = bench_config();
    let opts = ChvOptions::default();
    let mut group = c.benchmark_group("example3_one_jump");
    group.bench_function("chv", |b| {
        let mut k = 0u64;
        b.iter(|| {
            let mut stream = ExpStream::for_realization(BASE_SEED, k);
            k += 1;
            chv_simulate(&model, f64::INFINITY, 1, &mut stream, &config, &opts).expect("chv run")
        })
    });
    group.bench_function("fjm", |b| {
        let mut k = 0u64;
        b.iter(|| {
            let mut stream = ExpStream::for_realization(BASE_SEED, k);
            k += 1;
            fjm_simulate(&model, &bound, f64::INFINITY, 1, 1_000_000, &mut stream, &config).expect("fjm run")
        })
    });
    group.bench_function("tjm-event", |b| {
        let mut k = 0u64;
        b.iter(|| {
            let mut stream = ExpStream::for_realization(BASE_SEED, k);
            k += 1;
            tjm_event_simulate(&model, f64::INFINITY, 1, &mut stream, &config).expect("tjm run")
        })
    });
    group.finish();
}

fn example2_ten_jumps(c: &mut Criterion) {
    let (model, _) = fixture("example2");
    let config = bench_config();
    let opts = ChvOptions::default();
    let mut group = c.benchmark_group("example2_ten_jumps");
    group.bench_function("chv", |b| {
        let mut k = 0u64;
        b.iter(|| {
            let mut stream = ExpStream::for_realization(BASE_SEED, k);
            k += 1;
            chv_simulate(&model, f64::INFINITY, 10, &mut stream, &config, &opts).expect("chv run")
        })
    });
    group.finish();
}

criterion_group!(engines, example3_one_jump, example2_ten_jumps);
criterion_main!(engines);
