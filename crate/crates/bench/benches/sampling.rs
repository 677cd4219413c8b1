use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use tailforge::{ConditionalSampler, NaiveConditionalSampler, Shr3, UnconditionalSampler, VariateStream};
use tailforge_bench::cases;

const BATCH: usize = 10_000;

fn unconditional(c: &mut Criterion) {
    let mut g = c.benchmark_group("unconditional");
    g.throughput(Throughput::Elements(BATCH as u64));
    for case in cases() {
        let mut s = UnconditionalSampler::new(case.map, Shr3::new(1).unwrap());
        let mut buf = vec![0.0; BATCH];
        g.bench_function(case.name, |b| b.iter(|| s.fill(&mut buf).unwrap()));
    }
    g.finish();
}

fn conditional(c: &mut Criterion) {
    let mut g = c.benchmark_group("conditional");
    g.throughput(Throughput::Elements(BATCH as u64));
    for case in cases() {
        let mut s = ConditionalSampler::new(case.table(), Shr3::new(1).unwrap());
        let mut buf = vec![0.0; BATCH];
        g.bench_function(case.name, |b| b.iter(|| s.fill(&mut buf).unwrap()));
    }
    g.finish();
}

fn naive(c: &mut Criterion) {
    let mut g = c.benchmark_group("naive");
    g.sample_size(10);
    g.throughput(Throughput::Elements(100));
    for case in cases() {
        g.bench_function(case.name, |b| {
            b.iter_batched(
                || NaiveConditionalSampler::new(case.map, case.region.clone(), Shr3::new(1).unwrap()),
                |mut s| {
                    let mut buf = [0.0; 100];
                    s.fill(&mut buf).unwrap();
                },
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, unconditional, conditional, naive);
criterion_main!(benches);
