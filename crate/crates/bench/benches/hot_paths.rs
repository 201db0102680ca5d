use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entropy_ipp::planner::{rvi_iterate, CovarianceModel, PosteriorEntropy, PrunerConfig, SearchTree};
use entropy_ipp::{BeliefState, KernelSpec, Variant};
use entropy_ipp_bench::{gyre, inducing_grid, random_points};

fn gram(c: &mut Criterion) {
    let z = inducing_grid(3);
    let xs = random_points(1, 100);
    let mut g = c.benchmark_group("gram_100");
    for (name, k) in [
        ("exact", KernelSpec::Exact(*z.base())),
        ("sor", KernelSpec::approximate(Variant::Sor, z.clone())),
        ("fic", KernelSpec::approximate(Variant::Fic, z.clone())),
    ] {
        g.bench_function(name, |b| b.iter(|| k.gram_matrix(black_box(&xs)).unwrap()));
    }
    g.finish();
}

fn filter_update(c: &mut Criterion) {
    let mut g = c.benchmark_group("filter_update");
    for m in [3, 5, 8] {
        let z = inducing_grid(m);
        let belief = BeliefState::new(z);
        let x = [0.7, 0.4];
        g.bench_with_input(BenchmarkId::from_parameter(m * m), &belief, |b, belief| {
            b.iter(|| belief.observe(black_box(&x), 0.3, Variant::Fic, 0.05).unwrap())
        });
    }
    g.finish();
}

fn rvi(c: &mut Criterion) {
    let z = inducing_grid(3);
    let model = CovarianceModel { inducing: z.clone(), variant: Variant::Fic, noise_bound: 0.05 };
    let sigma = BeliefState::new(z).covariance().clone();
    let dynamics = gyre();
    let mut g = c.benchmark_group("rvi_grow");
    g.sample_size(20);
    for n in [1, 3, 5] {
        let pruner = PrunerConfig::headings(8, 0.03, f64::INFINITY).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let mut tree = SearchTree::new(vec![1.0, 0.5], sigma.clone(), 0, n, &PosteriorEntropy).unwrap();
                for _ in 0..n {
                    rvi_iterate(&mut tree, &dynamics, &model, &PosteriorEntropy, &pruner).unwrap();
                }
                tree.len()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, gram, filter_update, rvi);
criterion_main!(benches);
