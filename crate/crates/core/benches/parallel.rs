use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mirrorvis::propagator::Propagator;
use mirrorvis::quadrature::ThermalQuadrature;
use mirrorvis::scan::{log_axis, run_scan};
use mirrorvis::validate::reference_point;
use mirrorvis::visibility::quadrature_from_probes;
use mirrorvis::{DimensionlessParams, Execution, PhysConstants};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn scan(c: &mut Criterion) {
    let t = log_axis(1e-10, 1e-2, 100).unwrap();
    let g = log_axis(1e-8, 1e-1, 100).unwrap();
    let base = reference_point();
    let mut group = c.benchmark_group("scan_100x100");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_scan(&base, &t, &g, 1.0, 1.0, &PhysConstants::CODATA, exec).unwrap())
        });
    }
    group.finish();
}

fn probes(c: &mut Criterion) {
    let d = DimensionlessParams::new(1.0, 0.1, 0.05, 1e-3, 5.0).unwrap();
    let mut group = c.benchmark_group("probes_3_periods");
    group.sample_size(20);
    for (name, exec) in MODES {
        let prop = Propagator::new(2000).unwrap().with_execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| prop.extract_f(&d, 6.0 * PI).unwrap())
        });
    }
    group.finish();
}

fn quadrature(c: &mut Criterion) {
    let d = DimensionlessParams::new(1.0, 0.1, 0.05, 1e-3, 5.0).unwrap();
    let quad = ThermalQuadrature::new(40).unwrap();
    let probes = Propagator::new(500).unwrap().probes(&d, 6.0 * PI).unwrap();
    let mut group = c.benchmark_group("quadrature_route");
    group.sample_size(20);
    for (name, exec) in MODES {
        let prop = Propagator::new(500).unwrap().with_execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| quadrature_from_probes(&probes, &d, &quad, &prop).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, scan, probes, quadrature);
criterion_main!(benches);
