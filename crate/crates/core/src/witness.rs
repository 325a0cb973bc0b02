//! Structured positive block matrices on which every positive map acts
//! positively, the harness that checks this numerically, and the operator
//! inequalities behind it.
//!
//! Each family is a block pattern of `k × k` blocks of size `n`. Samples are
//! assembled from their upper blocks with the lower blocks set to the exact
//! adjoints, so zero blocks are exactly zero and repeated blocks are
//! bit-identical.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contraction::defects;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermitian_part, identity, is_psd, op_norm, pinv, sqrt_psd, zeros, ComplexMatrix,
    Tolerances,
};
use crate::maps::{apply_blockwise, builtin_witness, MatrixLinearMap};
use crate::sample::{
    random_contraction, random_hermitian, random_normal, random_normal_contraction,
    random_psd, rng_from_seed, SampleRng,
};

/// Halvings of the off-diagonal scale tried by the arrow generators.
const MAX_HALVINGS: usize = 60;

/// Which of the three `3 × 3` span patterns: `a uuᵀ + c (uwᵀ + wuᵀ) + b wwᵀ`
/// with `(u, w)` = `((1,1,0), (0,0,1))`, `((1,0,1), (0,1,0))` or
/// `((1,0,0), (0,1,1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanPattern {
    First,
    Second,
    Third,
}

impl SpanPattern {
    /// Membership of each coordinate in `u` (true) or `w` (false).
    fn in_u(self) -> [bool; 3] {
        match self {
            Self::First => [true, true, false],
            Self::Second => [true, false, true],
            Self::Third => [true, false, false],
        }
    }

    fn index(self) -> usize {
        match self {
            Self::First => 1,
            Self::Second => 2,
            Self::Third => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `[[T, S], [S*, T]]`.
    Toeplitz2,
    /// `3 × 3` blocks with `Γ₁₂ = Γ`, `Γ₂₃ = 0`, `Γ₁₃ = I`.
    Subnormal3I,
    /// `3 × 3` blocks with `Γ₂₃ = Γ`, `Γ₁₂ = 0`, `Γ₁₃ = I`.
    Subnormal3II,
    /// `T` on the first `k − 1` diagonal blocks, `R` last, Hermitian `Sᵢ` in
    /// the last block row and column.
    ArrowFirst,
    /// `T` first, `R` on the remaining diagonal blocks, Hermitian `Sᵢ` in the
    /// first block row and column.
    ArrowSecond,
    /// Positive elements of `C^{k×k} ⊗ span(pattern)`.
    Span3(SpanPattern),
}

impl Family {
    pub const ALL: [Family; 8] = [
        Self::Toeplitz2,
        Self::Subnormal3I,
        Self::Subnormal3II,
        Self::ArrowFirst,
        Self::ArrowSecond,
        Self::Span3(SpanPattern::First),
        Self::Span3(SpanPattern::Second),
        Self::Span3(SpanPattern::Third),
    ];

    pub fn name(self) -> String {
        match self {
            Self::Toeplitz2 => "toeplitz2".into(),
            Self::Subnormal3I => "subnormal3-i".into(),
            Self::Subnormal3II => "subnormal3-ii".into(),
            Self::ArrowFirst => "arrow-first".into(),
            Self::ArrowSecond => "arrow-second".into(),
            Self::Span3(p) => format!("span3-{}", p.index()),
        }
    }

    /// Block count the pattern fixes, if any.
    pub fn fixed_blocks(self) -> Option<usize> {
        match self {
            Self::Toeplitz2 => Some(2),
            Self::Subnormal3I | Self::Subnormal3II => Some(3),
            _ => None,
        }
    }

    /// Block size the pattern fixes, if any.
    pub fn fixed_block_dim(self) -> Option<usize> {
        match self {
            Self::Span3(_) => Some(3),
            _ => None,
        }
    }

    /// Block count used when the caller does not choose one.
    pub fn default_blocks(self) -> usize {
        self.fixed_blocks().unwrap_or(3)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFamilySample {
    pub family: Family,
    pub matrix: ComplexMatrix,
    pub block_dim: usize,
    pub block_count: usize,
    pub seed: u64,
}

/// Assembles a Hermitian block matrix from its diagonal and upper blocks;
/// unlisted blocks are zero and lower blocks are the adjoints.
fn hermitian_blocks(k: usize, n: usize, upper: &[(usize, usize, &ComplexMatrix)]) -> ComplexMatrix {
    let mut out = zeros(k * n, k * n);
    for &(i, j, b) in upper {
        debug_assert!(i <= j);
        out.view_mut((i * n, j * n), (n, n)).copy_from(b);
        if i != j {
            out.view_mut((j * n, i * n), (n, n)).copy_from(&b.adjoint());
        }
    }
    out
}

fn root(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(hermitian_part(&sqrt_psd(t, tol)?))
}

/// `[[T, T^{1/2} Γ T^{1/2}], [·, T]]`.
pub fn toeplitz2_matrix(t: &ComplexMatrix, gamma: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let h = root(t, tol)?;
    let s = &h * gamma * &h;
    Ok(hermitian_blocks(2, t.nrows(), &[(0, 0, t), (0, 1, &s), (1, 1, t)]))
}

/// The two `3 × 3` displays with `Γ` in the `(1,2)` (variant i) or `(2,3)`
/// (variant ii) position and the defect of `Γ` in the `(1,3)` position.
pub fn subnormal3_matrix(
    second: bool,
    t: &ComplexMatrix,
    gamma: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let h = root(t, tol)?;
    let d = defects(gamma, tol)?;
    let g = &h * gamma * &h;
    let n = t.nrows();
    if second {
        let corner = hermitian_part(&(&h * &d.d_t * &h));
        Ok(hermitian_blocks(
            3,
            n,
            &[(0, 0, t), (1, 1, t), (2, 2, t), (0, 2, &corner), (1, 2, &g)],
        ))
    } else {
        let corner = hermitian_part(&(&h * &d.d_t_star * &h));
        Ok(hermitian_blocks(
            3,
            n,
            &[(0, 0, t), (1, 1, t), (2, 2, t), (0, 1, &g), (0, 2, &corner)],
        ))
    }
}

/// Arrow patterns with `s.len() + 1` blocks.
pub fn arrow_matrix(second: bool, t: &ComplexMatrix, r: &ComplexMatrix, s: &[ComplexMatrix]) -> ComplexMatrix {
    let k = s.len() + 1;
    let n = t.nrows();
    let mut upper: Vec<(usize, usize, &ComplexMatrix)> = Vec::with_capacity(2 * k);
    if second {
        upper.push((0, 0, t));
        for (i, si) in s.iter().enumerate() {
            upper.push((i + 1, i + 1, r));
            upper.push((0, i + 1, si));
        }
    } else {
        for (i, si) in s.iter().enumerate() {
            upper.push((i, i, t));
            upper.push((i, k - 1, si));
        }
        upper.push((k - 1, k - 1, r));
    }
    hermitian_blocks(k, n, &upper)
}

/// `ρ = Pa ⊗ uuᵀ + Pb ⊗ (uwᵀ + wuᵀ) + Pc ⊗ wwᵀ`, entry by entry.
pub fn span3_matrix(
    pattern: SpanPattern,
    pa: &ComplexMatrix,
    pb: &ComplexMatrix,
    pc: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let m = pa.nrows();
    if [pa, pb, pc].iter().any(|p| p.shape() != (m, m)) {
        return Err(Error::DimensionMismatch("span coefficients must be equal square sizes".into()));
    }
    let u = pattern.in_u();
    Ok(ComplexMatrix::from_fn(3 * m, 3 * m, |r, c| {
        let (i, p) = (r / 3, r % 3);
        let (j, q) = (c / 3, c % 3);
        match (u[p], u[q]) {
            (true, true) => pa[(i, j)],
            (false, false) => pc[(i, j)],
            _ => pb[(i, j)],
        }
    }))
}

fn ensure_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    let check = is_psd(a, tol)?;
    if check.is_psd {
        Ok(())
    } else {
        Err(Error::NotPsd {
            min_eig: check.min_eig,
            allowed: -tol.psd_tol * op_norm(a).max(1.0),
        })
    }
}

fn arrow_sample(
    rng: &mut SampleRng,
    second: bool,
    n: usize,
    k: usize,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let t = random_psd(rng, n);
    let r = random_psd(rng, n);
    let (ht, hr) = (root(&t, tol)?, root(&r, tol)?);
    let raw: Vec<ComplexMatrix> = (0..k - 1)
        .map(|_| {
            let norm = rng.random::<f64>();
            let g = random_contraction(rng, n, n, norm);
            hermitian_part(&(&ht * g * &hr))
        })
        .collect();
    let mut scale = 1.0;
    for _ in 0..MAX_HALVINGS {
        let s: Vec<ComplexMatrix> = raw.iter().map(|x| x * c64(scale, 0.0)).collect();
        let a = arrow_matrix(second, &t, &r, &s);
        if is_psd(&a, tol)?.is_psd {
            return Ok(a);
        }
        scale *= 0.5;
    }
    Err(Error::NoConvergence)
}

/// `Pa, Pc > 0` and Hermitian `Pb` with `[[Pa, Pb], [Pb, Pc]] ≥ 0`.
///
/// `Pb = s H` for a random Hermitian direction `H`; positivity holds iff
/// `s² λ_max(Pc^{-1/2} H Pa⁻¹ H Pc^{-1/2}) ≤ 1`, and `s` is drawn uniformly
/// below that bound.
fn span_sample(rng: &mut SampleRng, pattern: SpanPattern, m: usize, tol: &Tolerances) -> Result<ComplexMatrix> {
    let pa = random_psd(rng, m);
    let pc = random_psd(rng, m);
    let h = random_hermitian(rng, m);
    let pa_inv = pinv(&pa, tol)?;
    let pc_inv_root = pinv(&root(&pc, tol)?, tol)?;
    let bound = op_norm(&hermitian_part(&(&pc_inv_root * &h * pa_inv * &h * &pc_inv_root)));
    let s = if bound > 0.0 { rng.random::<f64>() / bound.sqrt() } else { 0.0 };
    let pb = hermitian_part(&(h * c64(s, 0.0)));
    span3_matrix(pattern, &pa, &pb, &pc)
}

/// Draws one sample of `family` with `block_count` blocks of size
/// `block_dim`.
pub fn gen_family(
    family: Family,
    block_dim: usize,
    block_count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<StateFamilySample> {
    if block_dim == 0 || block_count == 0 {
        return Err(Error::UnsupportedCombination("block sizes must be positive".into()));
    }
    if let Some(k) = family.fixed_blocks() {
        if block_count != k {
            return Err(Error::UnsupportedCombination(format!(
                "{family} has exactly {k} blocks, not {block_count}"
            )));
        }
    }
    if let Some(n) = family.fixed_block_dim() {
        if block_dim != n {
            return Err(Error::UnsupportedCombination(format!(
                "{family} has blocks of size {n}, not {block_dim}"
            )));
        }
    }
    if matches!(family, Family::ArrowFirst | Family::ArrowSecond) && block_count < 2 {
        return Err(Error::UnsupportedCombination(format!(
            "{family} needs at least 2 blocks"
        )));
    }
    let n = block_dim;
    let mut rng = rng_from_seed(seed);
    let matrix = match family {
        Family::Toeplitz2 => {
            let t = random_psd(&mut rng, n);
            let norm = rng.random::<f64>();
            let g = random_contraction(&mut rng, n, n, norm);
            toeplitz2_matrix(&t, &g, tol)?
        }
        Family::Subnormal3I | Family::Subnormal3II => {
            let t = random_psd(&mut rng, n);
            let g = random_normal_contraction(&mut rng, n);
            subnormal3_matrix(family == Family::Subnormal3II, &t, &g, tol)?
        }
        Family::ArrowFirst => arrow_sample(&mut rng, false, n, block_count, tol)?,
        Family::ArrowSecond => arrow_sample(&mut rng, true, n, block_count, tol)?,
        Family::Span3(p) => span_sample(&mut rng, p, block_count, tol)?,
    };
    ensure_psd(&matrix, tol)?;
    Ok(StateFamilySample {
        family,
        matrix,
        block_dim: n,
        block_count,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessOutcome {
    pub passed: bool,
    pub min_eig: f64,
}

/// Whether `(I_k ⊗ Φ)(A)` is positive, for `A` with `k × k` blocks.
pub fn check_blockwise(
    phi: &MatrixLinearMap,
    a: &ComplexMatrix,
    k: usize,
    tol: &Tolerances,
) -> Result<WitnessOutcome> {
    let image = hermitian_part(&apply_blockwise(phi, a, k)?);
    let check = is_psd(&image, tol)?;
    Ok(WitnessOutcome {
        passed: check.is_psd,
        min_eig: check.min_eig,
    })
}

pub fn witness_check(
    phi: &MatrixLinearMap,
    sample: &StateFamilySample,
    tol: &Tolerances,
) -> Result<WitnessOutcome> {
    check_blockwise(phi, &sample.matrix, sample.block_count, tol)
}

/// One line of a witness batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub family: String,
    pub seed: u64,
    pub witness: String,
    pub min_eig: f64,
    pub passed: bool,
}

/// Runs `trials` samples with seeds `seed, seed + 1, …` in parallel; the
/// records come back in seed order.
pub fn witness_batch(
    family: Family,
    witness: &str,
    block_dim: usize,
    block_count: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<TrialRecord>> {
    witness_batch_cycled(&[family], witness, block_dim, block_count, trials, seed, tol)
}

/// As [`witness_batch`], with trial `i` drawn from `families[i % len]`.
pub fn witness_batch_cycled(
    families: &[Family],
    witness: &str,
    block_dim: usize,
    block_count: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<TrialRecord>> {
    if families.is_empty() {
        return Err(Error::UnsupportedCombination("no families to sample".into()));
    }
    let phi = builtin_witness(witness, block_dim)?;
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let family = families[i % families.len()];
            let s = seed.wrapping_add(i as u64);
            let sample = gen_family(family, block_dim, block_count, s, tol)?;
            let out = witness_check(&phi, &sample, tol)?;
            Ok(TrialRecord {
                family: family.name(),
                seed: s,
                witness: witness.to_string(),
                min_eig: out.min_eig,
                passed: out.passed,
            })
        })
        .collect()
}

/// Projector onto `Σᵢ |ii⟩ / √n`, as `n × n` blocks of size `n`.
pub fn bell_projector(n: usize) -> ComplexMatrix {
    let mut v = zeros(n * n, 1);
    let a = c64(1.0 / (n as f64).sqrt(), 0.0);
    for i in 0..n {
        v[(i * n + i, 0)] = a;
    }
    hermitian_part(&(&v * v.adjoint()))
}

/// Horodecki's two-qutrit family
/// `2/7 P + α/7 σ₊ + (5 − α)/7 σ₋`, with `P` the maximally entangled
/// projector, `σ₊` uniform on `|01⟩, |12⟩, |20⟩` and `σ₋` on the swapped
/// pairs. It has positive partial transpose for `α ≤ 4` and is entangled
/// for `α > 3`.
pub fn horodecki_state(alpha: f64) -> ComplexMatrix {
    let mut rho = bell_projector(3) * c64(2.0 / 7.0, 0.0);
    let plus = c64(alpha / 21.0, 0.0);
    let minus = c64((5.0 - alpha) / 21.0, 0.0);
    for i in 0..3 {
        let j = (i + 1) % 3;
        rho[(3 * i + j, 3 * i + j)] += plus;
        rho[(3 * j + i, 3 * j + i)] += minus;
    }
    rho
}

/// Worst result of one inequality over a suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityResult {
    pub name: &'static str,
    pub worst_min_eig: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub trials: usize,
    pub results: Vec<InequalityResult>,
}

impl InequalityReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

struct Tracker {
    name: &'static str,
    worst: f64,
    passed: bool,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst: f64::INFINITY,
            passed: true,
        }
    }

    fn record(&mut self, m: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
        let check = is_psd(&hermitian_part(m), tol)?;
        self.worst = self.worst.min(check.min_eig);
        self.passed &= check.is_psd;
        Ok(())
    }

    fn finish(self) -> InequalityResult {
        InequalityResult {
            name: self.name,
            worst_min_eig: self.worst,
            passed: self.passed,
        }
    }
}

/// The two defect gaps `I − Φ(Γ*Γ) − Φ(D_{Γ*})²` and `I − Φ(Γ*Γ) − Φ(D_Γ)²`.
fn defect_gaps(phi: &MatrixLinearMap, g: &ComplexMatrix, tol: &Tolerances) -> Result<[ComplexMatrix; 2]> {
    let d = defects(g, tol)?;
    let base = identity(phi.out_dim) - phi.apply(&(g.adjoint() * g))?;
    let fs = phi.apply(&d.d_t_star)?;
    let f = phi.apply(&d.d_t)?;
    Ok([&base - &fs * &fs, base - &f * &f])
}

/// Checks, over `trials` random inputs each, the inequalities a unital
/// positive map satisfies:
///
/// - `‖Φ(Γ)‖ ≤ 1` for contractions (reported through `I − Φ(Γ)*Φ(Γ)`);
/// - `Φ(S²) ≥ Φ(S)²` for self-adjoint `S`;
/// - `Φ(A*A) ≥ Φ(A*)Φ(A)` and `Φ(A*A) ≥ Φ(A)Φ(A*)` for normal `A`;
/// - both defect gaps are positive for normal contractions `Γ`.
pub fn positivity_inequality_suite(
    phi: &MatrixLinearMap,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<InequalityReport> {
    if !phi.flags.unital {
        return Err(Error::NotUnital {
            deviation: phi.unital_deviation(),
        });
    }
    let n = phi.in_dim;
    let mut rng = rng_from_seed(seed);
    let mut russo = Tracker::new("russo_dye");
    let mut kadison = Tracker::new("kadison");
    let mut lower = Tracker::new("normal_adjoint_first");
    let mut upper = Tracker::new("normal_adjoint_second");
    let mut gap_star = Tracker::new("defect_gap_star");
    let mut gap = Tracker::new("defect_gap");
    let id = identity(phi.out_dim);
    for _ in 0..trials {
        let norm = rng.random::<f64>();
        let g = random_contraction(&mut rng, n, n, norm);
        let fg = phi.apply(&g)?;
        russo.record(&(&id - fg.adjoint() * &fg), tol)?;

        let mut s = random_hermitian(&mut rng, n);
        let norm = op_norm(&s);
        if norm > 0.0 {
            s /= c64(norm, 0.0);
        }
        let fs = phi.apply(&s)?;
        kadison.record(&(phi.apply(&(&s * &s))? - &fs * &fs), tol)?;

        let a = random_normal(&mut rng, n);
        let ata = phi.apply(&(a.adjoint() * &a))?;
        let (fa, fa_star) = (phi.apply(&a)?, phi.apply(&a.adjoint())?);
        lower.record(&(&ata - &fa_star * &fa), tol)?;
        upper.record(&(&ata - &fa * &fa_star), tol)?;

        let c = random_normal_contraction(&mut rng, n);
        let [a1, a2] = defect_gaps(phi, &c, tol)?;
        gap_star.record(&a1, tol)?;
        gap.record(&a2, tol)?;
    }
    Ok(InequalityReport {
        trials,
        results: [russo, kadison, lower, upper, gap_star, gap]
            .into_iter()
            .map(Tracker::finish)
            .collect(),
    })
}

/// Normalizes the reduction map on `n × n` matrices to be unital.
pub fn unital_reduction(n: usize) -> Result<MatrixLinearMap> {
    if n < 2 {
        return Err(Error::UnsupportedCombination("reduction map needs n >= 2".into()));
    }
    Ok(builtin_witness("reduction", n)?.scaled(1.0 / (n as f64 - 1.0)))
}
