use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

use isosplit::dynkin::find_record;
use isosplit::exec::Exec;
use isosplit::homspace::{displacement_profile, Isometry, ProfileConfig};
use isosplit::liealg::{build_model, matrix_exp};
use isosplit::rootsys::{grid_orbit_check, RootSystem};

fn modes() -> Vec<(&'static str, Exec)> {
    let mut m = vec![("sequential", Exec::Sequential)];
    if Exec::Parallel.is_parallel() {
        m.push(("parallel", Exec::Parallel));
    }
    m
}

fn orbit_grid(c: &mut Criterion) {
    let refl = RootSystem::new("B3".parse().unwrap()).unwrap().reflections();
    let mut group = c.benchmark_group("orbit_grid_B3");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| grid_orbit_check(&refl, 4, exec).unwrap())
        });
    }
    group.finish();
}

fn displacement(c: &mut Criterion) {
    let model = build_model(&find_record("so6-stiefel", 3).unwrap()).unwrap();
    let k = matrix_exp(&(&model.k2.basis[0] * 0.7));
    let gamma = Isometry::new(&model, "k2", k, DMatrix::identity(6, 6)).unwrap();
    let cfg = ProfileConfig {
        samples: 24,
        ..ProfileConfig::default()
    };
    let mut group = c.benchmark_group("displacement_so6");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| displacement_profile(&model, &gamma, &cfg, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, orbit_grid, displacement);
criterion_main!(benches);
