use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use rb1_bench::{workload, GAMES};
use rb1_core::serialize::{from_binary, observation_tensor, to_binary};
use rb1_core::tools::bench::run_traces;
use rb1_core::Environment;

fn playouts(c: &mut Criterion) {
    let mut group = c.benchmark_group("playouts");
    group.sample_size(10);
    for file in GAMES {
        let w = workload(file, 1024, 1);
        let steps: u64 = w.traces.iter().map(|t| t.len() as u64).sum();
        group.throughput(Throughput::Elements(steps));
        for log in [false, true] {
            let id = BenchmarkId::new(w.name, if log { "log-on" } else { "log-off" });
            group.bench_function(id, |b| {
                b.iter(|| run_traces(&w.program, w.act, &w.table, &w.traces, log).unwrap())
            });
        }
    }
    group.finish();
}

fn legal_actions(c: &mut Criterion) {
    let mut group = c.benchmark_group("legal_actions");
    for file in GAMES {
        let w = workload(file, 1, 1);
        let env = Environment::with_act(&w.program, w.act, &[]).unwrap();
        group.bench_function(w.name, |b| b.iter(|| env.legal_actions().unwrap()));
    }
    group.finish();
}

fn serialization(c: &mut Criterion) {
    let mut group = c.benchmark_group("serialization");
    for file in GAMES {
        let w = workload(file, 1, 7);
        let mut env = Environment::with_act(&w.program, w.act, &[]).unwrap();
        for &i in &w.traces[0][..w.traces[0].len() / 2] {
            env.apply(&w.table[i as usize]).unwrap();
        }
        let bytes = to_binary(&env);
        group.bench_function(BenchmarkId::new("to_binary", w.name), |b| b.iter(|| to_binary(&env)));
        group.bench_function(BenchmarkId::new("from_binary", w.name), |b| {
            b.iter(|| from_binary(&w.program, w.act, &bytes).unwrap())
        });
        group.bench_function(BenchmarkId::new("tensor", w.name), |b| b.iter(|| observation_tensor(&env, 0)));
    }
    group.finish();
}

criterion_group!(benches, playouts, legal_actions, serialization);
criterion_main!(benches);
