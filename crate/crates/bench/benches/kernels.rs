use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use geoswarm::attitude::{attitude_error, control_known_ff};
use geoswarm::deployment::{ascending_direction, deployment_stats};
use geoswarm::linalg::symmetric_eigenvalues;
use geoswarm::so3::{exp_coord_derivative, exp_so3, hat, log_so3};
use geoswarm::{DesiredAttitudeRate, RotationVector, Vector3};
use geoswarm_bench::fig2_positions;

fn so3(c: &mut Criterion) {
    let tau = RotationVector::new(Vector3::new(0.4, -1.2, 0.7));
    let tiny = RotationVector::new(Vector3::new(3e-5, -1e-5, 2e-5));
    let r = exp_so3(&tau);
    let omega = hat(&Vector3::new(0.3, 0.1, -0.5));
    c.bench_function("exp_so3", |b| b.iter(|| exp_so3(black_box(&tau))));
    c.bench_function("exp_so3 small angle", |b| {
        b.iter(|| exp_so3(black_box(&tiny)))
    });
    c.bench_function("log_so3", |b| b.iter(|| log_so3(black_box(&r))));
    c.bench_function("exp_coord_derivative", |b| {
        b.iter(|| exp_coord_derivative(black_box(&tau), black_box(&omega)))
    });
    let rd = exp_so3(&RotationVector::new(Vector3::new(0.1, 0.2, 0.3)));
    let rate = DesiredAttitudeRate::new(omega, 0.1).unwrap();
    c.bench_function("attitude error + control", |b| {
        b.iter(|| {
            let e = attitude_error(black_box(&rd), black_box(&r)).unwrap();
            control_known_ff(&e.rotation, &rate, 2.0)
        })
    });
}

fn deployment(c: &mut Criterion) {
    let ps = fig2_positions();
    let stats = deployment_stats(&ps).unwrap();
    let samples = [1.0, 2.0, 0.5, 1.5];
    c.bench_function("symmetric_eigenvalues", |b| {
        b.iter(|| symmetric_eigenvalues(black_box(&stats.covariance)))
    });
    c.bench_function("deployment_stats N=4", |b| {
        b.iter(|| deployment_stats(black_box(&ps)))
    });
    c.bench_function("ascending_direction N=4", |b| {
        b.iter(|| ascending_direction(black_box(&samples), black_box(&stats)))
    });
}

criterion_group!(benches, so3, deployment);
criterion_main!(benches);
