//! Dense complex matrix kernel.
//!
//! Everything in the crate is expressed with [`ComplexMatrix`], a column-major
//! `nalgebra` matrix of `Complex64`. This module adds the pieces the rest of
//! the crate leans on: Hermitian eigendecomposition with a descending
//! spectrum, positive square roots, the Moore-Penrose pseudoinverse, positivity
//! tests, the Kronecker product with the ancilla as the slow index, and the
//! matching partial trace.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical tolerances shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative eigenvalue tolerance for positivity and Hermiticity checks.
    pub psd_tol: f64,
    /// Relative singular-value cutoff for the pseudoinverse. `None` means
    /// `max(rows, cols) * f64::EPSILON`.
    pub rank_tol: Option<f64>,
    /// Frobenius tolerance for parametrize/reconstruct round trips.
    pub recon_tol: f64,
    /// Largest excess norm a solved contraction may carry before it is
    /// rejected; anything within the slack is clipped back to norm one.
    pub contraction_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_tol: 1e-10,
            rank_tol: None,
            recon_tol: 1e-8,
            contraction_slack: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn with_psd_tol(mut self, psd_tol: f64) -> Self {
        self.psd_tol = psd_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.psd_tol > 0.0
            && self.recon_tol > 0.0
            && self.contraction_slack > 0.0
            && self.rank_tol.is_none_or(|t| t > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMatrix(format!(
                "tolerances must be strictly positive: {self:?}"
            )))
        }
    }

    fn rank_cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        let rel = self
            .rank_tol
            .unwrap_or(rows.max(cols) as f64 * f64::EPSILON);
        rel * sigma_max
    }
}

/// Rejects matrices with NaN or infinite entries.
pub fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix("non-finite entry".into()))
    }
}

pub fn ensure_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Builds a matrix from real row-major entries; handy for fixtures.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { ZERO })
}

#[inline]
pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.norm()
}

/// `(A + A*) / 2`, exactly Hermitian.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let mut h = a.clone();
    for i in 0..n {
        h[(i, i)] = c64(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn hermitian_asymmetry(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `‖U*U − I‖_F`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols())).norm()
}

/// Spectrum of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            scaled.column_mut(j).scale_mut(s);
        }
        hermitian_part(&(scaled * self.vectors.adjoint()))
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        self.map(|x| x)
    }
}

/// Hermitian eigendecomposition `A = V diag(λ) V*` with `λ` descending.
///
/// The input is accepted when `‖A − A*‖_F ≤ psd_tol · ‖A‖_F`; the Hermitian
/// part is what gets decomposed.
pub fn herm_eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermEig> {
    ensure_square(a, "herm_eig input")?;
    ensure_finite(a)?;
    let asymmetry = hermitian_asymmetry(a);
    let allowed = tol.psd_tol * a.norm();
    if asymmetry > allowed {
        return Err(Error::NotHermitian { asymmetry, allowed });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(HermEig {
            values: DVector::zeros(0),
            vectors: zeros(0, 0),
        });
    }
    let h = hermitian_part(a);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000 * n.max(1))
        .ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermEig { values, vectors })
}

/// Spectral norm of a Hermitian matrix from its eigenvalues.
fn hermitian_norm(eig: &HermEig) -> f64 {
    eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Unique positive square root.
///
/// Eigenvalues in `[−psd_tol·max(‖A‖, 1), 0)` are rounding noise and clamp to zero;
/// anything more negative is [`Error::NotPsd`].
pub fn sqrt_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = herm_eig(a, tol)?;
    let allowed = tol.psd_tol * hermitian_norm(&eig).max(1.0);
    let min_eig = eig.min();
    if min_eig < -allowed {
        return Err(Error::NotPsd { min_eig, allowed });
    }
    Ok(eig.map(|x| x.max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eig: f64,
}

/// Positivity test: passes iff `λ_min ≥ −psd_tol · max(‖A‖₂, 1)`.
pub fn is_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<PsdCheck> {
    let eig = herm_eig(a, tol)?;
    let min_eig = if eig.values.is_empty() { 0.0 } else { eig.min() };
    let bound = tol.psd_tol * hermitian_norm(&eig).max(1.0);
    Ok(PsdCheck {
        is_psd: min_eig >= -bound,
        min_eig,
    })
}

/// Thin singular value decomposition `A = U diag(σ) V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: DVector<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(a)?;
    let (r, c) = a.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            u: zeros(r, 0),
            sigma: DVector::zeros(0),
            v: zeros(c, 0),
        });
    }
    // nalgebra's complex SVD mis-factorizes some rank-deficient inputs; faer's
    // is used instead and converted back.
    let m = faer::Mat::<Complex64>::from_fn(r, c, |i, j| a[(i, j)]);
    let dec = m.thin_svd().map_err(|_| Error::NoConvergence)?;
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    Ok(Svd {
        u: ComplexMatrix::from_fn(r, k, |i, j| fu[(i, j)]),
        sigma: DVector::from_fn(k, |i, _| fs[i].re),
        v: ComplexMatrix::from_fn(c, k, |i, j| fv[(i, j)]),
    })
}

/// Largest singular value, computed from the spectrum of the smaller Gram
/// matrix.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let gram = if r >= c { a.adjoint() * a } else { a * a.adjoint() };
    let h = hermitian_part(&gram);
    match SymmetricEigen::try_new(h, f64::EPSILON, 10_000 * r.min(c)) {
        Some(eig) => eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(*v)).sqrt(),
        // the Gram route only fails on pathological input; the SVD is the fallback
        None => svd(a).map_or(f64::NAN, |s| s.sigma.iter().fold(0.0_f64, |m, v| m.max(*v))),
    }
}

/// Moore-Penrose pseudoinverse; singular values below the rank cutoff are
/// treated as zero.
pub fn pinv(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let (r, c) = a.shape();
    let s = svd(a)?;
    let smax = s.sigma.iter().fold(0.0_f64, |m, v| m.max(*v));
    let cutoff = tol.rank_cutoff(r, c, smax);
    let mut v = s.v.clone();
    for (j, &sj) in s.sigma.iter().enumerate() {
        let inv = if sj > cutoff && sj > 0.0 { 1.0 / sj } else { 0.0 };
        v.column_mut(j).scale_mut(inv);
    }
    Ok(v * s.u.adjoint())
}

/// Unitary factor of the polar decomposition of a square matrix.
pub fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a, "polar input")?;
    let s = svd(a)?;
    Ok(&s.u * s.v.adjoint())
}

/// Kronecker product; block `(i, j)` of the result is `a[(i, j)] · b`, so the
/// first factor is the slow (ancilla) index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Traces out the first (ancilla) factor of a matrix on `C^k ⊗ C^n`.
pub fn ptrace_first(x: &ComplexMatrix, k: usize, n: usize) -> Result<ComplexMatrix> {
    if x.nrows() != k * n || x.ncols() != k * n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {0}x{0}, got {1}x{2}",
            k * n,
            x.nrows(),
            x.ncols()
        )));
    }
    let mut out = zeros(n, n);
    for a in 0..k {
        out += x.view((a * n, a * n), (n, n));
    }
    Ok(out)
}

/// Block diagonal direct sum.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Stacks matrices with equal column counts vertically.
pub fn vstack(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    if blocks.iter().any(|b| b.ncols() != cols) {
        return Err(Error::DimensionMismatch("vstack column counts differ".into()));
    }
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), b.shape()).copy_from(b);
        at += b.nrows();
    }
    Ok(out)
}

/// Concatenates matrices with equal row counts horizontally.
pub fn hstack(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(Error::DimensionMismatch("hstack row counts differ".into()));
    }
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), b.shape()).copy_from(b);
        at += b.ncols();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_matrix, random_psd, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn eig_of_identity_and_diagonal() {
        let e = herm_eig(&identity(2), &tol()).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0]);
        assert!(unitarity_defect(&e.vectors) < 1e-14);

        let e = herm_eig(&real_diag(&[-1.0, 3.0]), &tol()).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        // eigenvectors are a (phased) permutation of the identity
        for j in 0..2 {
            let col = e.vectors.column(j);
            let big = col.iter().filter(|z| z.norm() > 1.0 - 1e-14).count();
            assert_eq!(big, 1);
        }
    }

    #[test]
    fn eig_reassembles_random_hermitian() {
        let mut rng = rng_from_seed(11);
        for _ in 0..50 {
            let b = random_matrix(&mut rng, 5, 5);
            let a = hermitian_part(&(&b + b.adjoint()));
            let e = herm_eig(&a, &tol()).unwrap();
            assert!((e.reassemble() - &a).norm() <= 1e-12 * a.norm());
            assert!(unitarity_defect(&e.vectors) <= 1e-12);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = from_real_rows(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(herm_eig(&a, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_of_simple_cases() {
        assert!((sqrt_psd(&identity(3), &tol()).unwrap() - identity(3)).norm() < 1e-15);
        let r = sqrt_psd(&real_diag(&[4.0, 9.0]), &tol()).unwrap();
        assert!((r - real_diag(&[2.0, 3.0])).norm() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = rng_from_seed(3);
        for n in 1..7 {
            let b = random_matrix(&mut rng, n, n);
            let a = b.adjoint() * &b;
            let r = sqrt_psd(&a, &tol()).unwrap();
            assert!((&r * &r - &a).norm() <= 1e-10 * a.norm());
            assert!(is_psd(&r, &tol()).unwrap().is_psd);
        }
    }

    #[test]
    fn sqrt_clamps_noise_but_rejects_negative() {
        let noisy = real_diag(&[1.0, -1e-13]);
        let r = sqrt_psd(&noisy, &tol()).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
        let bad = real_diag(&[1.0, -1e-3]);
        assert!(matches!(sqrt_psd(&bad, &tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn pinv_trivial_cases() {
        assert!((pinv(&identity(3), &tol()).unwrap() - identity(3)).norm() < 1e-15);
        let z = pinv(&zeros(2, 3), &tol()).unwrap();
        assert_eq!(z.shape(), (3, 2));
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn pinv_left_inverse_of_tall_full_rank() {
        let mut rng = rng_from_seed(5);
        let a = random_matrix(&mut rng, 4, 2);
        let p = pinv(&a, &tol()).unwrap();
        assert!((&p * &a - identity(2)).norm() <= 1e-10);
    }

    #[test]
    fn penrose_conditions_all_shapes() {
        let mut rng = rng_from_seed(8);
        for r in 1..=8 {
            for c in 1..=8 {
                // rank-deficient half the time
                let a = if (r + c) % 2 == 0 && r.min(c) > 1 {
                    random_matrix(&mut rng, r, 1) * random_matrix(&mut rng, 1, c)
                } else {
                    random_matrix(&mut rng, r, c)
                };
                let p = pinv(&a, &tol()).unwrap();
                let scale = 1e-10 * p.norm() * a.norm();
                assert!((&a * &p * &a - &a).norm() <= scale);
                assert!((&p * &a * &p - &p).norm() <= scale);
                let ap = &a * &p;
                let pa = &p * &a;
                assert!((&ap - ap.adjoint()).norm() <= scale);
                assert!((&pa - pa.adjoint()).norm() <= scale);
            }
        }
    }

    #[test]
    fn psd_test_cases() {
        let r = is_psd(&identity(2), &tol()).unwrap();
        assert!(r.is_psd && (r.min_eig - 1.0).abs() < 1e-15);
        let r = is_psd(&real_diag(&[1.0, -1.0]), &tol()).unwrap();
        assert!(!r.is_psd && (r.min_eig + 1.0).abs() < 1e-15);
        let mut rng = rng_from_seed(2);
        for n in 1..6 {
            assert!(is_psd(&random_psd(&mut rng, n), &tol()).unwrap().is_psd);
        }
    }

    #[test]
    fn kron_and_partial_trace() {
        let mut rng = rng_from_seed(4);
        let rho = random_psd(&mut rng, 3);
        let k = kron(&identity(2), &rho);
        assert_eq!(k.view((0, 0), (3, 3)), rho);
        assert_eq!(k.view((3, 3), (3, 3)), rho);
        assert_eq!(k.view((0, 3), (3, 3)).norm(), 0.0);

        let mut e0 = zeros(4, 4);
        e0[(0, 0)] = ONE;
        let back = ptrace_first(&kron(&e0, &rho), 4, 3).unwrap();
        assert!((back - &rho).norm() < 1e-15);

        let x = random_matrix(&mut rng, 12, 12);
        let t = ptrace_first(&x, 4, 3).unwrap();
        assert!((trace(&t) - trace(&x)).norm() <= 1e-12);
        assert!(ptrace_first(&x, 5, 3).is_err());
    }

    #[test]
    fn partial_trace_is_linear() {
        let mut rng = rng_from_seed(6);
        let x = random_matrix(&mut rng, 6, 6);
        let y = random_matrix(&mut rng, 6, 6);
        let (a, b) = (c64(0.3, -1.2), c64(2.0, 0.5));
        let lhs = ptrace_first(&(&x * a + &y * b), 2, 3).unwrap();
        let rhs = ptrace_first(&x, 2, 3).unwrap() * a + ptrace_first(&y, 2, 3).unwrap() * b;
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
