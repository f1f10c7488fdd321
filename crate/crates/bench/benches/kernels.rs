use criterion::{criterion_group, criterion_main, Criterion};
use landdiv::kde::KdeModel;
use landdiv::quadrature::QuadConfig;
use landdiv::uniform::{conditional_expectation_uniform, CondMethod};
use landdiv::WeightVector;
use landdiv_bench::face_points;
use std::hint::black_box;

fn kde(c: &mut Criterion) {
    let probes = face_points(64, 2);
    for lambda in [1e-3, 1e-2] {
        let mut model = KdeModel::build(face_points(1000, 1), lambda, 1e-4).unwrap();
        c.bench_function(&format!("plan/lambda={lambda}"), |b| {
            b.iter(|| model.plan_euler_maclaurin().unwrap())
        });
        let plan = model.prepare_euler_maclaurin().unwrap().clone();
        c.bench_function(&format!("eval_loggamma/lambda={lambda}"), |b| {
            b.iter(|| {
                probes
                    .iter()
                    .map(|x| model.eval_loggamma(black_box(x)).unwrap())
                    .sum::<f64>()
            })
        });
        c.bench_function(&format!("eval_euler_maclaurin/lambda={lambda}"), |b| {
            b.iter(|| {
                probes
                    .iter()
                    .map(|x| model.eval_euler_maclaurin(&plan, black_box(x)).unwrap())
                    .sum::<f64>()
            })
        });
    }
}

fn conditional(c: &mut Criterion) {
    let method = CondMethod::Quadrature(QuadConfig::default());
    for w in [vec![20.0, 50.0, 80.0], vec![51.042, 78.880, 89.993, 95.730]] {
        let w = WeightVector::new(w).unwrap();
        let a = 0.5 * (w.first() + w.last());
        c.bench_function(&format!("conditional_h/covers={}", w.len()), |b| {
            b.iter(|| conditional_expectation_uniform(black_box(a), &w, &method).unwrap())
        });
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kde, conditional
}
criterion_main!(benches);
