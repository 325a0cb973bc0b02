use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use schur_dilate::contraction::julia;
use schur_dilate::dilation::{channel_dilate, povm_dilate, ChannelOptions};
use schur_dilate::sc_params::{
    matrix_parametrize, matrix_reconstruct, psd_parametrize, psd_reconstruct, row_parametrize, BlockShape,
};
use schur_dilate::witness::{witness_batch, Family};
use schur_dilate::Tolerances;
use schur_dilate_bench::{channel, contraction, povm, psd};

fn bench_julia(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("julia");
    for n in [2, 6, 16] {
        let t = contraction(n, n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &t, |b, t| b.iter(|| julia(black_box(t), &tol)));
    }
    g.finish();
}

fn bench_params(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("parametrize");
    for k in [2, 4, 8] {
        let shape = BlockShape::square(vec![2; k]).unwrap();
        let n = 2 * k;
        let t = contraction(2, n, 2);
        let row_shape = BlockShape::row(2, vec![2; k]).unwrap();
        g.bench_with_input(BenchmarkId::new("row", k), &t, |b, t| {
            b.iter(|| row_parametrize(black_box(t), &row_shape, &tol))
        });
        let t = contraction(n, n, 3);
        g.bench_with_input(BenchmarkId::new("matrix", k), &t, |b, t| {
            b.iter(|| matrix_parametrize(black_box(t), &shape, &tol))
        });
        let p = matrix_parametrize(&t, &shape, &tol).unwrap();
        g.bench_with_input(BenchmarkId::new("matrix_reconstruct", k), &p, |b, p| {
            b.iter(|| matrix_reconstruct(black_box(p), &tol))
        });
        let a = psd(n, 4);
        g.bench_with_input(BenchmarkId::new("psd", k), &a, |b, a| {
            b.iter(|| psd_parametrize(black_box(a), &shape, &tol))
        });
        let p = psd_parametrize(&a, &shape, &tol).unwrap();
        g.bench_with_input(BenchmarkId::new("psd_reconstruct", k), &p, |b, p| {
            b.iter(|| psd_reconstruct(black_box(p), &tol))
        });
    }
    g.finish();
}

fn bench_dilations(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("dilate");
    for (dim, outcomes) in [(2, 3), (4, 8)] {
        let p = povm(dim, outcomes, 5);
        g.bench_with_input(BenchmarkId::new("povm", format!("{dim}x{outcomes}")), &p, |b, p| {
            b.iter(|| povm_dilate(black_box(p), None, &tol))
        });
    }
    for (n, rank) in [(2, 2), (4, 4)] {
        let ch = channel(n, n, rank, 6);
        g.bench_with_input(BenchmarkId::new("channel", format!("{n}r{rank}")), &ch, |b, ch| {
            b.iter(|| channel_dilate(black_box(ch), &ChannelOptions::default(), &tol))
        });
    }
    g.finish();
}

fn bench_witness(c: &mut Criterion) {
    let tol = Tolerances::default();
    c.bench_function("witness_batch/toeplitz2_transpose_32", |b| {
        b.iter(|| witness_batch(Family::Toeplitz2, "transpose", 2, 3, 32, black_box(7), &tol))
    });
}

criterion_group!(benches, bench_julia, bench_params, bench_dilations, bench_witness);
criterion_main!(benches);
