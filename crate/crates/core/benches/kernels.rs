use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use planeauto::automorphism::{henon_normal_form, PolyMap};
use planeauto::exec::Exec;
use planeauto::green::{green_batch, raster_slice, Chart, GreenFunctions, GreenMode};
use planeauto::FieldSpec;

fn cubic_henon() -> GreenFunctions {
    let k = FieldSpec::rationals();
    let f = PolyMap::parse("y", "x + y^3 - 2/3*y", &k).unwrap();
    GreenFunctions::new(&henon_normal_form(&f).unwrap())
}

fn policies() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn bench_raster(c: &mut Criterion) {
    let g = cubic_henon();
    let chart = Chart::real_square((0.0, 0.0), 1.5 * g.filtration_radius());
    let mut group = c.benchmark_group("raster_slice");
    group.sample_size(20);
    for side in [64u32, 256] {
        for (name, exec) in policies() {
            group.bench_with_input(BenchmarkId::new(name, side), &side, |b, &n| {
                b.iter(|| raster_slice(&g, &chart, (n, n), GreenMode::Gmax, 200, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_green_batch(c: &mut Criterion) {
    let g = cubic_henon();
    let r = g.filtration_radius();
    // Deterministic spiral of sample points, half inside the filtration square.
    let points: Vec<(Complex64, Complex64)> = (0..20_000)
        .map(|i| {
            let t = i as f64 * 0.01;
            let s = 2.0 * r * (i as f64 / 20_000.0);
            (Complex64::from_polar(s, t), Complex64::from_polar(s * 0.5, 1.7 * t))
        })
        .collect();
    let mut group = c.benchmark_group("green_batch");
    group.sample_size(20);
    for (name, exec) in policies() {
        group.bench_function(name, |b| b.iter(|| green_batch(&g, GreenMode::Gplus, black_box(&points), 200, r, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_raster, bench_green_batch);
criterion_main!(benches);
