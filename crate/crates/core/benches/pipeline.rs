//! Pipeline throughput on one worker versus the default rayon pool. Build
//! with `--no-default-features` to measure the purely sequential path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use morphoscan::detection::detect_planes;
use morphoscan::pipeline::{self, PipelineConfig};
use morphoscan::pointcloud::{downsample, estimate_normals};
use morphoscan::synth::{generate, random_corridor};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut out = vec![(
        "1 thread".to_string(),
        rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
    )];
    if default > 1 {
        out.push((
            format!("{default} threads"),
            rayon::ThreadPoolBuilder::new().num_threads(default).build().unwrap(),
        ));
    }
    out
}

fn bench(c: &mut Criterion) {
    let cloud = generate(&random_corridor(42).build()).unwrap();
    let cfg = PipelineConfig::default();
    let bare = morphoscan::PointCloud::new(cloud.points().to_vec()).unwrap();

    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("downsample+normals", &name), &bare, |b, bare| {
            b.iter(|| pool.install(|| estimate_normals(&downsample(bare, 0.05).unwrap(), 12).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("detect", &name), &cloud, |b, cloud| {
            b.iter(|| pool.install(|| detect_planes(cloud, &cfg.detection).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("full", &name), &cloud, |b, cloud| {
            b.iter(|| pool.install(|| pipeline::run(cloud, &cfg, true).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
