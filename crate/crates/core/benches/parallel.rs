use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use unidist_core::metrics::uiqi_with;
use unidist_core::raster::bicubic_upsample_with;
use unidist_core::transform::{apply_raster_with, fit_band};
use unidist_core::{Execution, Raster, SampleVector, TargetDistribution, TransformSet};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn raster(width: usize, height: usize, bands: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height * bands)
        .map(|_| rng.gen::<f64>() * 2047.0)
        .collect();
    Raster::from_f64(width, height, bands, data).unwrap()
}

fn apply(c: &mut Criterion) {
    let r = raster(512, 512, 4, 1);
    let transforms = (0..4)
        .map(|b| {
            let s = SampleVector::new(r.band(b)[..10_000].to_vec()).unwrap();
            fit_band(&s, 1000, TargetDistribution::normal(), b).unwrap()
        })
        .collect();
    let set = TransformSet::new(transforms, 10_000, 0).unwrap();
    let mut group = c.benchmark_group("apply_raster_512x512x4");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| apply_raster_with(&set, &r, exec).unwrap())
        });
    }
    group.finish();
}

fn upsample(c: &mut Criterion) {
    let r = raster(128, 128, 4, 2);
    let mut group = c.benchmark_group("bicubic_128x128x4_by4");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bicubic_upsample_with(&r, 4, exec).unwrap())
        });
    }
    group.finish();
}

fn quality(c: &mut Criterion) {
    let a = raster(512, 512, 1, 3);
    let b = raster(512, 512, 1, 4);
    let mut group = c.benchmark_group("uiqi_512x512_w32");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| uiqi_with(&a, &b, 32, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, apply, upsample, quality);
criterion_main!(benches);
