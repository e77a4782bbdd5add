use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use photon_store::dynamics::bath::run_discrete_bath;
use photon_store::{
    adiabatic_design, design_drive, design_drive_markovian, simulate_nonmarkovian,
    BathDiscretization, InitialState,
};
use photon_store_bench::scenario;

fn design(c: &mut Criterion) {
    let mut group = c.benchmark_group("design");
    for dt in [1e-3, 1e-4] {
        let (p, pr, g) = scenario(2.0, dt);
        group.bench_with_input(BenchmarkId::new("memory_kernel", dt), &g, |b, g| {
            b.iter(|| design_drive(&p, black_box(&pr), g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("markovian", dt), &g, |b, g| {
            b.iter(|| design_drive_markovian(&p, black_box(&pr), g).unwrap())
        });
    }
    let (p, pr, g) = scenario(25.0, 1e-4);
    group.bench_function("dark_state", |b| {
        b.iter(|| adiabatic_design(&p, black_box(&pr), &g).unwrap())
    });
    group.finish();
}

fn simulate(c: &mut Criterion) {
    let (p, pr, g) = scenario(1.6716, 1e-4);
    let drive = design_drive(&p, &pr, &g).unwrap().drive();
    let init = InitialState::with_offset(pr.rho_offset).unwrap();
    c.bench_function("simulate/memory_kernel", |b| {
        b.iter(|| simulate_nonmarkovian(&p, black_box(&drive), &pr, &init, &g).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let (p, pr, g) = scenario(2.0, 1e-3);
    let drive = design_drive(&p, &pr, &g).unwrap().drive();
    let init = InitialState::with_offset(pr.rho_offset).unwrap();
    for modes in [200, 400] {
        let bath = BathDiscretization::new(&pr.spectral(), modes, 40.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(modes), &bath, |b, bath| {
            b.iter(|| run_discrete_bath(&p, &drive, &pr, &init, &g, bath).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, design, simulate, oracle);
criterion_main!(benches);
