use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use stinet_core::meanfield::{derivative, integrate, BirthMode, CompartmentVector, Coupling, MeanFieldParams, PathogenRates};
use stinet_core::{PathogenParams, SimConfig, World};

fn engine_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine");
    group.sample_size(20);
    for n in [1_000usize, 10_000] {
        let config = SimConfig {
            population: n,
            ..SimConfig::desk_scale()
        };
        group.bench_function(format!("step_n{n}"), |b| {
            b.iter_batched_ref(
                || World::new(config.clone(), 1).unwrap(),
                |w| black_box(w.step()),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn table_params() -> MeanFieldParams {
    let ps = [PathogenParams::chlamydia(), PathogenParams::gonorrhea(), PathogenParams::syphilis()];
    MeanFieldParams {
        pathogens: ps.iter().map(|p| PathogenRates::from_params(p, 0.5)).collect(),
        birth_rate: 3.24e-5,
        natural_death_rate: 2.27e-5,
        birth_mode: BirthMode::AllSusceptible,
        coupling: Coupling::MassAction,
    }
}

fn meanfield(c: &mut Criterion) {
    let p = table_params();
    let mut v = CompartmentVector::zeros(3);
    v.occupancy.iter_mut().for_each(|x| *x = 1.0 / 27.0);
    c.bench_function("derivative_k3", |b| b.iter(|| derivative(black_box(&v), &p)));
    c.bench_function("rk4_k3_one_year_hourly", |b| {
        b.iter(|| integrate(black_box(&v), &p, 0.0, 365.0, 1.0 / 24.0).unwrap())
    });
}

criterion_group!(benches, engine_step, meanfield);
criterion_main!(benches);
