use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use labelmine::classifiers::{fit, ClassifierKind};
use labelmine::fitness::evaluate;
use labelmine::{LabelingCode, ProblemSpec, RandomSeed};
use labelmine_bench::bench_split;

fn fits(c: &mut Criterion) {
    let split = bench_split();
    let code = LabelingCode::random(&ProblemSpec::new(200, 10).unwrap(), RandomSeed(3));
    let mut group = c.benchmark_group("fit_200x784");
    group.sample_size(20);
    for kind in [ClassifierKind::Mlp, ClassifierKind::Svm, ClassifierKind::Rf, ClassifierKind::Centroid] {
        group.bench_with_input(BenchmarkId::from_parameter(kind.name()), &kind, |b, &kind| {
            b.iter(|| fit(kind, &split.train.features, &code, 10, RandomSeed(5)).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("fitness_evaluation");
    group.sample_size(20);
    for kind in ClassifierKind::EXPERIMENT {
        group.bench_with_input(BenchmarkId::from_parameter(kind.name()), &kind, |b, &kind| {
            b.iter(|| evaluate(&code, &split, kind, RandomSeed(5)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, fits);
criterion_main!(benches);
