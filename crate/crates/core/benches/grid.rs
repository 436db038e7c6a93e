use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncgeom::curvature::{compare_with, engine_object, one_form_density, Grid, Object};
use ncgeom::metric::MetricDescriptor;
use ncgeom::par::{set_strategy, Strategy};

const STRATEGIES: [Strategy; 2] = [Strategy::Sequential, Strategy::Parallel];

fn grid_comparison(c: &mut Criterion) {
    let m = MetricDescriptor::nonconformal3();
    let engine = engine_object(&m, Object::Ricci).unwrap();
    let grid = Grid::linspace(-3.0, 3.0, 25);
    let mut g = c.benchmark_group("ricci_grid_nonconformal3");
    g.sample_size(10);
    for s in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{:?}", s)), &s, |b, &s| {
            set_strategy(s);
            b.iter(|| compare_with(&m, Object::Ricci, &engine, &grid, 1e-6).unwrap());
        });
    }
    g.finish();
}

fn symbolic_pipeline(c: &mut Criterion) {
    let m = MetricDescriptor::nonconformal3();
    let mut g = c.benchmark_group("one_form_density_nonconformal3");
    g.sample_size(10);
    for s in STRATEGIES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{:?}", s)), &s, |b, &s| {
            set_strategy(s);
            b.iter(|| one_form_density(&m).unwrap());
        });
    }
    g.finish();
}

criterion_group!(benches, grid_comparison, symbolic_pipeline);
criterion_main!(benches);
