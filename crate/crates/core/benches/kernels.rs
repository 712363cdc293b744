//! Parallel against sequential execution of the data-parallel kernels.
//! Without the `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isoradial::elliptic::EllipticContext;
use isoradial::forest::{free_energy_fourier, WilsonSampler};
use isoradial::green::green_local_batch;
use isoradial::isograph::{PeriodicGraph, VertexRef};
use isoradial::laplacian::{Massive, SparseLaplacian};
use isoradial::par::Exec;
use isoradial::spectral::{amoeba_sample, char_poly};
use std::hint::black_box;

const PATHS: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn green_pairs(c: &mut Criterion) {
    let g = PeriodicGraph::preset("paper-fig4").unwrap();
    let ctx = EllipticContext::new(0.6).unwrap();
    let o = VertexRef::new(0, 0, 0);
    let pairs: Vec<_> = (-4..4).flat_map(|a| (-4..4).map(move |b| (VertexRef::new(1, a, b), o))).collect();
    let a: Vec<f64> = green_local_batch(Exec::Parallel, &g, &ctx, &pairs).into_iter().map(|r| r.unwrap().value).collect();
    let b: Vec<f64> = green_local_batch(Exec::Sequential, &g, &ctx, &pairs).into_iter().map(|r| r.unwrap().value).collect();
    assert_eq!(a, b);
    let mut group = c.benchmark_group("green_local_batch_64");
    for (name, exec) in PATHS {
        group.bench_function(name, |bch| bch.iter(|| green_local_batch(exec, &g, &ctx, black_box(&pairs))));
    }
    group.finish();
}

fn fourier_free_energy(c: &mut Criterion) {
    let mut group = c.benchmark_group("free_energy_fourier");
    group.sample_size(10);
    for preset in ["square", "paper-fig4"] {
        let g = PeriodicGraph::preset(preset).unwrap();
        let m = Massive::new(&g, EllipticContext::new(0.5).unwrap());
        for (name, exec) in PATHS {
            group.bench_with_input(BenchmarkId::new(name, preset), &m, |bch, m| bch.iter(|| free_energy_fourier(exec, m, 1e-10).unwrap()));
        }
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let g = PeriodicGraph::preset("paper-fig4").unwrap();
    let ctx = EllipticContext::new(0.894).unwrap();
    let m = Massive::new(&g, ctx.clone());
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::new("amoeba_sample_200", name), |bch| bch.iter(|| amoeba_sample(exec, &g, &ctx, 200)));
        group.bench_function(BenchmarkId::new("char_poly", name), |bch| bch.iter(|| char_poly(exec, black_box(&m)).unwrap()));
    }
    group.finish();
}

fn wilson(c: &mut Criterion) {
    let ctx = EllipticContext::new(0.7).unwrap();
    let fg = PeriodicGraph::preset("triangular").unwrap().torus(6, 6).unwrap();
    let lap = SparseLaplacian::new(&ctx, &fg);
    let sampler = WilsonSampler::new(&lap, &fg, &ctx);
    // batches are seeded per stream, so both paths draw the same forests
    assert_eq!(sampler.sample_many(Exec::Parallel, 9000, 3), sampler.sample_many(Exec::Sequential, 9000, 3));
    let mut group = c.benchmark_group("wilson_sample_many_32768");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(name, |bch| bch.iter(|| sampler.sample_many(exec, 32768, black_box(7))));
    }
    group.finish();
}

criterion_group!(benches, green_pairs, fourier_free_energy, spectral, wilson);
criterion_main!(benches);
