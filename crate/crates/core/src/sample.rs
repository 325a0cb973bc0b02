//! Seeded random matrix generators.
//!
//! All generators draw from a caller-supplied RNG; [`rng_from_seed`] gives the
//! ChaCha8 stream the crate uses everywhere so that a seed pins a sample
//! bit-for-bit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, hermitian_part, op_norm, ComplexMatrix, ZERO};

pub type SampleRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries i.i.d. standard complex Gaussian (unit variance).
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(s * re, s * im)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let b = random_matrix(rng, n, n);
    hermitian_part(&(&b + b.adjoint()))
}

/// `B*B / n` for Gaussian `B`; almost surely positive definite.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let b = random_matrix(rng, n, n);
    hermitian_part(&((b.adjoint() * &b) / c64(n.max(1) as f64, 0.0)))
}

/// Density matrix of full rank (trace one).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let p = random_psd(rng, n);
    let t: f64 = p.diagonal().iter().map(|z| z.re).sum();
    hermitian_part(&(p / c64(t, 0.0)))
}

/// Gaussian matrix rescaled to spectral norm `norm`.
pub fn random_contraction<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    norm: f64,
) -> ComplexMatrix {
    let g = random_matrix(rng, rows, cols);
    let n = op_norm(&g);
    if n == 0.0 {
        return g;
    }
    g * c64(norm / n, 0.0)
}

/// Haar-distributed unitary via QR with the phase of `R`'s diagonal removed.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    random_unitary(rng, rows).columns(0, cols).into_owned()
}

/// Normal contraction `U diag(z) U*` with eigenvalues in the closed unit disk.
///
/// Roughly one eigenvalue in eight is placed on the unit circle so that the
/// boundary of the disk is exercised.
pub fn random_normal_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let mut d = ComplexMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        let on_circle = rng.random_range(0..8) == 0;
        let r = if on_circle { 1.0 } else { rng.random::<f64>().sqrt() };
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        d[(i, i)] = c64(r * theta.cos(), r * theta.sin());
    }
    &u * d * u.adjoint()
}

/// Normal matrix with unit spectral norm (not necessarily a contraction in
/// the strict sense of its eigenvalue moduli all below one).
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let mut d = ComplexMatrix::from_element(n, n, ZERO);
    let mut max = 0.0_f64;
    for i in 0..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        d[(i, i)] = c64(re, im);
        max = max.max(d[(i, i)].norm());
    }
    if max > 0.0 {
        d /= c64(max, 0.0);
    }
    &u * d * u.adjoint()
}
