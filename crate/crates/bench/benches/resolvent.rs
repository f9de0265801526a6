use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use pointdamp_bench::{reference, sine_input};
use pointdamp_core::eigenfunctions::eval_phi;
use pointdamp_core::resolvent::{resolvent_apply, resolvent_collocation};
use pointdamp_core::{compute_spectrum, Sign};

fn resolvent(c: &mut Criterion) {
    let p = reference(0.05);
    let mut g = c.benchmark_group("resolvent_apply");
    for grid in [256usize, 1024] {
        let input = sine_input(grid, Complex64::new(1.0, 1.0));
        g.bench_with_input(BenchmarkId::from_parameter(grid), &input, |b, inp| {
            b.iter(|| resolvent_apply(&p, inp).unwrap())
        });
    }
    g.finish();
    let input = sine_input(1024, Complex64::new(1.0, 1.0));
    c.bench_function("resolvent_collocation/1024", |b| {
        b.iter(|| resolvent_collocation(&p, &input).unwrap())
    });
}

fn eigenfunction(c: &mut Criterion) {
    let p = reference(0.05);
    let spec = compute_spectrum(&p, 4).unwrap();
    let rec = *spec.find(3, Sign::Plus).unwrap();
    c.bench_function("eval_phi/1024", |b| {
        b.iter(|| eval_phi(&p, &rec.point, 1024).unwrap())
    });
}

criterion_group!(benches, resolvent, eigenfunction);
criterion_main!(benches);
