use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use crossmag::oracle::{integrate_time_domain, solve_sidebands, LinearDynamics, TimeDomainSettings};
use crossmag::{run_sweep, solve_steady_state, Axis, DelayMethod, DetuningMode, Observable, ResponseModel, SweepSpec, SystemParams};
use crossmag_bench::{broad_phonon_params, pinned_params, probe, steady};

fn closed_form(c: &mut Criterion) {
    let params = pinned_params();
    let steady = steady(&params);
    let model = ResponseModel::new(&params, &steady);
    let probe = probe(&params);

    c.bench_function("response_point", |b| b.iter(|| model.response(black_box(&probe)).unwrap()));
    c.bench_function("group_delay_analytic", |b| {
        b.iter(|| model.group_delay(black_box(&probe), DelayMethod::Analytic, params.omega_b).unwrap())
    });
    c.bench_function("group_delay_fd", |b| {
        b.iter(|| model.group_delay(black_box(&probe), DelayMethod::FiniteDifference, params.omega_b).unwrap())
    });
    c.bench_function("sideband_solve", |b| b.iter(|| solve_sidebands(&params, &steady, black_box(&probe)).unwrap()));
}

fn sweeps(c: &mut Criterion) {
    let params = pinned_params();
    let steady = steady(&params);
    let spec = SweepSpec::one_d(Axis::default_sigma(), Observable::Absorption, probe(&params));
    c.bench_function("spectrum_2001", |b| b.iter(|| run_sweep(&params, &steady, black_box(&spec)).unwrap()));
}

fn steady_state(c: &mut Criterion) {
    let pinned = pinned_params();
    c.bench_function("steady_pinned", |b| b.iter(|| solve_steady_state(black_box(&pinned)).unwrap()));

    let iterated = SystemParams {
        sphere_diameter: 125e-6,
        drive_detuning_mode: DetuningMode::SelfConsistent,
        g_mb_effective_override: None,
        ..SystemParams::default()
    };
    c.bench_function("steady_selfconsistent", |b| b.iter(|| solve_steady_state(black_box(&iterated)).unwrap()));
}

fn time_domain(c: &mut Criterion) {
    let params = broad_phonon_params();
    let steady = steady(&params);
    let probe = probe(&params);
    let dynamics = LinearDynamics::new(&params, &steady, &probe);
    let settings = TimeDomainSettings::recommended(dynamics.fastest_frequency(), dynamics.slowest_decay());
    let mut group = c.benchmark_group("time_domain");
    group.sample_size(10);
    group.bench_function("linear_rk4", |b| b.iter(|| integrate_time_domain(&params, &steady, black_box(&probe), settings).unwrap()));
    group.finish();
}

criterion_group!(benches, closed_form, sweeps, steady_state, time_domain);
criterion_main!(benches);
