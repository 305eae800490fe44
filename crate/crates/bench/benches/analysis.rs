use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qsdc_bench::{linspace, P1_VALUES};
use qsdc_core::analysis::{
    delta_theta_threshold, eta_threshold, secrecy_capacity, sweep, CapacityParams, SweepAxis, SweepSpec,
};
use qsdc_core::tolerance::SOLVER;
use qsdc_core::{EfficiencyParams, LinkBudget};

fn closed_form(c: &mut Criterion) {
    let params = CapacityParams::with_eta(0.1, PI / 400.0, 0.7);
    c.bench_function("secrecy_capacity", |b| b.iter(|| secrecy_capacity(black_box(&params)).unwrap()));
}

fn thresholds(c: &mut Criterion) {
    c.bench_function("eta_threshold/six_p1", |b| {
        b.iter(|| P1_VALUES.iter().map(|&p| eta_threshold(black_box(p), PI / 40.0, SOLVER).unwrap()).sum::<f64>())
    });
    c.bench_function("delta_theta_threshold/p1_0.1", |b| {
        b.iter(|| delta_theta_threshold(black_box(0.1), SOLVER).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let spec = SweepSpec {
        axis: SweepAxis::Distance,
        grid: linspace(0.0, 100.0, 1001),
        base: CapacityParams::with_eta(0.1, PI / 400.0, 1.0),
        link: LinkBudget::default(),
        efficiency: Some(EfficiencyParams::default()),
    };
    c.bench_function("sweep/distance_1001", |b| b.iter(|| sweep(black_box(&spec)).unwrap()));
}

criterion_group!(benches, closed_form, thresholds, sweeps);
criterion_main!(benches);
