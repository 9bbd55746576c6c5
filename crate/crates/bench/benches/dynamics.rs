use criterion::{criterion_group, criterion_main, Criterion};
use infobench::bayes::sample_parameters;
use infobench::dynamics::simulate;
use infobench::harness::{default_truth, generate_synthetic_forcing};
use infobench::network::{record_trajectories, AssimilationConfig};
use infobench::regression::{build_lag_matrix, train_regressor, RegressorConfig};
use infobench::{ModelKind, ModelParams, ModelState};
use std::hint::black_box;

fn models(c: &mut Criterion) {
    let forcing = generate_synthetic_forcing(1, 3650).unwrap();
    let mut group = c.benchmark_group("simulate_3650_days");
    for kind in [ModelKind::Hymod, ModelKind::Nash, ModelKind::Abc] {
        let p = sample_parameters(kind, 1, 2).unwrap()[0];
        group.bench_function(kind.to_string(), |b| {
            b.iter(|| simulate(black_box(&p), &forcing, &p.zero_state(), 0).unwrap())
        });
    }
    group.finish();

    let truth = default_truth();
    let start = ModelState::zeroed(20.0, truth.n_tanks());
    let short = generate_synthetic_forcing(2, 365).unwrap();
    let cfg = AssimilationConfig::default();
    c.bench_function("record_trajectories/200x365", |b| {
        b.iter(|| {
            record_trajectories(
                &truth,
                &short,
                &start,
                200,
                3,
                cfg.param_jitter,
                cfg.state_noise,
            )
            .unwrap()
        })
    });

    let truth = ModelParams::Hymod(truth);
    let long = generate_synthetic_forcing(3, 2000).unwrap();
    let flow = simulate(&truth, &long, &truth.zero_state(), 0)
        .unwrap()
        .streamflow
        .to_vec();
    let emb = build_lag_matrix(long.precip(), &flow, 30).unwrap();
    let reg = RegressorConfig {
        max_epochs: 50,
        ..RegressorConfig::default()
    };
    let mut group = c.benchmark_group("regressor");
    group.sample_size(10);
    group.bench_function("train_50_epochs/2000x30", |b| {
        b.iter(|| train_regressor(black_box(&emb), &reg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, models);
criterion_main!(benches);
