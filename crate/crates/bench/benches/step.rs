use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use thresim_core::*;

fn step_loop(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for (name, params) in [
        ("single_asset", MarketParams::single_asset_reference()),
        ("two_asset", MarketParams::two_asset_reference()),
    ] {
        group.bench_function(name, |b| {
            b.iter_batched(
                || Market::new(params.clone(), InitPolicy::default()).unwrap(),
                |mut m| {
                    for _ in 0..1000 {
                        std::hint::black_box(m.step());
                    }
                    m
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let params = MarketParams { horizon: 10_000, burn_in: 0, ..MarketParams::two_asset_reference() };
    c.bench_function("run_two_asset_10k", |b| {
        b.iter(|| run(&params, &InitPolicy::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = step_loop, full_run
}
criterion_main!(benches);
