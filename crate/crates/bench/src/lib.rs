//! Seeded inputs shared by the benchmarks.

use schur_dilate::dilation::{KrausChannel, Povm};
use schur_dilate::sample::{random_contraction, random_isometry, random_psd, rng_from_seed};
use schur_dilate::ComplexMatrix;

/// Strict contraction of norm 0.9.
pub fn contraction(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    random_contraction(&mut rng_from_seed(seed), rows, cols, 0.9)
}

pub fn psd(n: usize, seed: u64) -> ComplexMatrix {
    random_psd(&mut rng_from_seed(seed), n)
}

/// Rank-one POVM on `dim` with `outcomes` effects.
pub fn povm(dim: usize, outcomes: usize, seed: u64) -> Povm {
    let m = random_isometry(&mut rng_from_seed(seed), outcomes, dim).adjoint();
    let vectors = (0..outcomes).map(|j| m.columns(j, 1).into_owned()).collect();
    Povm::from_vectors(dim, vectors).expect("isometry columns resolve the identity")
}

/// Trace-preserving channel with `rank` Kraus operators.
pub fn channel(in_dim: usize, out_dim: usize, rank: usize, seed: u64) -> KrausChannel {
    let v = random_isometry(&mut rng_from_seed(seed), rank * out_dim, in_dim);
    let kraus = (0..rank).map(|i| v.rows(i * out_dim, out_dim).into_owned()).collect();
    KrausChannel::new(in_dim, out_dim, kraus).expect("stacked isometry is trace preserving")
}
