use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sketchlab::nettop::{all_topologies, check_kelley_axioms, ConvergenceOracle, KelleyBounds};
use sketchlab::sketch::{enumerate_models, ModelBounds};
use sketchlab::sketchlib::{classify_copreorders, preorder_sketch};
use sketchlab::Exec;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn preorder_models(c: &mut Criterion) {
    let s = preorder_sketch();
    let mut g = c.benchmark_group("preorder_models_k3");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| enumerate_models(&s, &ModelBounds::exact(3), exec).unwrap().len())
        });
    }
    g.finish();
}

fn kelley_sweep(c: &mut Criterion) {
    let spaces = all_topologies(3);
    let mut g = c.benchmark_group("kelley_axioms_n3_d3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.map(&spaces, |t| {
                    check_kelley_axioms(&ConvergenceOracle::of_space(t, 3), KelleyBounds::new(3), Exec::Sequential)
                        .all_passed()
                })
            })
        });
    }
    g.finish();
}

fn copreorders(c: &mut Criterion) {
    let mut g = c.benchmark_group("copreorders_n3");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| classify_copreorders(3, 5, exec).len()));
    }
    g.finish();
}

criterion_group!(benches, preorder_models, kelley_sweep, copreorders);
criterion_main!(benches);
