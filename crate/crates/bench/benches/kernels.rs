use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pension_core::engine::run_strategy;
use pension_core::regression::DEFAULT_LEVEL_FLOOR;
use pension_core::scenario::simulate;
use pension_core::*;

fn panel(paths: usize, seed: u64) -> PensionPanel {
    let set = simulate(&ModelParams::default(), paths, 41, seed).unwrap();
    PensionPanel::build(
        &set,
        &CareerSchedule::default(),
        &AnnuitySpec::default(),
        DEFAULT_LEVEL_FLOOR,
    )
    .unwrap()
}

fn loess(c: &mut Criterion) {
    let n = 2000;
    let xs: Vec<f64> = (0..n).map(|i| ((i * 7919) % n) as f64 / n as f64 * 4.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin()).collect();
    let model = LoessModel::new(&xs, &ys, 0.2, 1).unwrap();
    c.bench_function("loess_eval_2000", |b| b.iter(|| model.eval(black_box(1.37))));
}

fn scenarios(c: &mut Criterion) {
    c.bench_function("simulate_500x41", |b| {
        b.iter(|| simulate(&ModelParams::default(), 500, 41, black_box(1)).unwrap())
    });
}

fn strategies(c: &mut Criterion) {
    let panel = panel(500, 2);
    let params = TargetParams::default().with_r(0.03);
    c.bench_function("cumulative_500_paths", |b| {
        b.iter(|| run_strategy(&panel, &StrategyKind::Cumulative(params)).unwrap())
    });
    c.bench_function("individual_500_paths", |b| {
        b.iter(|| run_strategy(&panel, &StrategyKind::Individual(params)).unwrap())
    });
}

fn dynamic_program(c: &mut Criterion) {
    let panel = panel(200, 3);
    let params = TargetParams::default().with_r(0.01);
    let problem = DpProblem::for_contribution(&panel, &params, 0).unwrap();
    let cfg = DpConfig::default();
    let mut group = c.benchmark_group("dp");
    group.sample_size(10);
    group.bench_function("single_program_200_paths", |b| {
        b.iter(|| PolicyModel::solve(&problem, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(kernels, loess, scenarios, strategies, dynamic_program);
criterion_main!(kernels);
