//! Monte-Carlo sampling throughput across worker counts (rayon batches with
//! the default `parallel` feature, the same batches sequentially without it)
//! and the cost of the heavy state-evolution stages.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tbsim_core::detection::{run_monte_carlo, DetectorConfig, LossBudget};
use tbsim_core::elements::{
    apply_delay_interferometer_tracked, apply_switch, InterferometerSetting, SwitchSchedule,
};
use tbsim_core::fock::{Port, PureState};
use tbsim_core::source::{prepare_timebin_qubit, spdc_state, SourceConfig};

fn two_pair_prepared() -> PureState {
    let source = SourceConfig {
        pair_truncation: 3,
        ..SourceConfig::default()
    };
    let mut state = spdc_state(&source).expect("valid source");
    state = prepare_timebin_qubit(&state, Port::A, 0.3).expect("prep A");
    prepare_timebin_qubit(&state, Port::B, 0.7).expect("prep B")
}

fn bench_state_evolution(c: &mut Criterion) {
    let prepared = two_pair_prepared();
    c.bench_function("entangler_switch_3pair", |b| {
        b.iter(|| {
            apply_switch(
                &prepared,
                &SwitchSchedule::entangler(),
                (Port::A, Port::B),
                (Port::C, Port::D),
            )
            .expect("switch")
        })
    });

    let switched = apply_switch(
        &prepared,
        &SwitchSchedule::entangler(),
        (Port::A, Port::B),
        (Port::C, Port::D),
    )
    .expect("switch");
    c.bench_function("analysis_interferometer_3pair", |b| {
        b.iter(|| {
            apply_delay_interferometer_tracked(
                &switched,
                &InterferometerSetting::analysis(Port::C, 0.4),
            )
            .expect("analysis")
        })
    });
}

fn bench_monte_carlo(c: &mut Criterion) {
    let state = apply_switch(
        &two_pair_prepared(),
        &SwitchSchedule::entangler(),
        (Port::A, Port::B),
        (Port::C, Port::D),
    )
    .expect("switch");
    let detectors = [DetectorConfig::new(Port::C, 2), DetectorConfig::new(Port::D, 2)];
    let mut budget = LossBudget::transparent();
    budget.apply_db(Port::C, 4.0);
    budget.apply_db(Port::D, 4.0);

    let mut group = c.benchmark_group("monte_carlo_1e6_pulses");
    group.sample_size(10);
    for workers in [1usize, 2, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(workers), &workers, |b, &w| {
            b.iter(|| run_monte_carlo(&state, &detectors, &budget, 1_000_000, 7, w))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_state_evolution, bench_monte_carlo);
criterion_main!(benches);
