use atomtronics_bench::{ring_case, signal};
use atomtronics_core::fft::Fft2;
use atomtronics_core::survival;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft2");
    for n in [256, 512] {
        let mut plan = Fft2::new(n, n);
        let mut data = signal(n * n);
        let mut spec = vec![Default::default(); n * n];
        group.bench_with_input(BenchmarkId::new("forward_inverse", n), &n, |b, _| {
            b.iter(|| {
                plan.forward_t(&mut data, &mut spec);
                plan.inverse_t(&mut spec, &mut data);
                black_box(&data);
            })
        });
    }
    group.finish();
}

fn split_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("split_step");
    group.sample_size(20);
    for n in [256, 512] {
        let (mut psi, mut stepper) = ring_case(n, 0.75, 0.02);
        group.bench_with_input(BenchmarkId::new("real_10_steps", n), &n, |b, _| {
            b.iter(|| stepper.advance(black_box(&mut psi), 10).unwrap())
        });
    }
    group.finish();
}

fn observables(c: &mut Criterion) {
    let (psi0, mut stepper) = ring_case(256, 0.75, 0.02);
    let mut psi = psi0.clone();
    stepper.advance(&mut psi, 50).unwrap();
    c.bench_function("survival_256", |b| {
        b.iter(|| survival(black_box(&psi0), black_box(&psi)).unwrap())
    });
    c.bench_function("energy_terms_256", |b| {
        b.iter(|| stepper.energy_terms(black_box(&psi)).unwrap())
    });
}

criterion_group!(benches, fft, split_step, observables);
criterion_main!(benches);
