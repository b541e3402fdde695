use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use krivine::ha2::{read_witness, simulate_run, weak_reduce};
use krivine::kam::{run, DEFAULT_FUEL};
use krivine::stdlib::{compile_primrec, Build};
use krivine_bench::{demo_config, demo_process, inlined_demo, signature, translated_demo};
use std::hint::black_box;

fn demo_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("demo_run");
    for n in [2u64, 10, 40] {
        for (label, build) in [
            ("instructions", Build::Instructions),
            ("fixpoint", Build::Fixpoint),
        ] {
            let cfg = demo_config(n, build);
            let p = demo_process();
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| run(black_box(&p), &cfg))
            });
        }
    }
    group.finish();
}

fn cps_witness(c: &mut Criterion) {
    let mut group = c.benchmark_group("cps_witness");
    for n in [2u64, 10] {
        let t = translated_demo(&demo_config(n, Build::Instructions));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| read_witness(black_box(&t), DEFAULT_FUEL).expect("witness"))
        });
    }
    group.finish();
}

fn weak_reduction(c: &mut Criterion) {
    let t = translated_demo(&demo_config(4, Build::Instructions));
    c.bench_function("weak_reduce/demo_4", |b| {
        b.iter(|| weak_reduce(black_box(&t), 100_000))
    });
}

fn simulation(c: &mut Criterion) {
    let cfg = demo_config(2, Build::Instructions);
    let p = inlined_demo(&cfg);
    let plain = krivine::kam::MachineConfig::new();
    c.bench_function("simulate_run/demo_2", |b| {
        b.iter(|| simulate_run(black_box(&p), &plain, 100_000).expect("simulation"))
    });
}

fn primrec(c: &mut Criterion) {
    let sig = signature();
    let mut group = c.benchmark_group("compile_primrec");
    for f in ["+", "*", "minus"] {
        group.bench_function(f, |b| {
            b.iter(|| compile_primrec(&sig, black_box(f)).expect("compiles"))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = demo_run, cps_witness, weak_reduction, simulation, primrec
}
criterion_main!(benches);
