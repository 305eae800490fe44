use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qsdc_bench::protocol_fixture;
use qsdc_core::protocol::run_full_protocol;

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_full_protocol");
    group.sample_size(20);
    for r in [1_000usize, 10_000] {
        let params = protocol_fixture(r, 7);
        group.bench_function(format!("r_{r}"), |b| b.iter(|| run_full_protocol(black_box(&params)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, full_run);
criterion_main!(benches);
