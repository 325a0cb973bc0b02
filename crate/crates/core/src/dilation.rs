//! Unitary dilations of rank-one POVMs and of Kraus channels, both read off
//! the Julia operator of a stacked contraction.
//!
//! A rank-one POVM `E(i) = vᵢvᵢ*` gives the co-isometry `M = [v₁ … vₙ]`; the
//! columns of `J(M)` are orthonormal and compress to the `vᵢ` on the first
//! `m` coordinates. A channel with Kraus operators `Eᵢ` gives the isometry
//! `T = [E₁; …; E_r]`; the first block column of `J(T)` is `[T; 0]`, so
//! conjugating `ρ ⊕ 0` and tracing out the ancilla (the slow index) returns
//! `Σ Eᵢ ρ Eᵢ*`.
//!
//! Both constructions accept the freedom `diag(I, U₁) · J · diag(I, U₂)`,
//! which leaves the compressions and the reduced output unchanged.

use std::ops::Range;

use crate::contraction::{defects, julia_from_parts};
use crate::error::{Error, Result};
use crate::linalg::{
    direct_sum, hermitian_asymmetry, hermitian_part, herm_eig, identity, is_psd, op_norm,
    ptrace_first, trace, unitarity_defect, vstack, zeros, ComplexMatrix, Tolerances,
};

/// Largest `‖U*U − I‖` accepted for freedom factors.
const UNITARY_TOL: f64 = 1e-10;
/// Pass thresholds of [`povm_verify`].
const PROJECTOR_TOL: f64 = 1e-9;
const COMPRESSION_TOL: f64 = 1e-10;

/// Finite POVM on `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    pub dim: usize,
    pub effects: Vec<ComplexMatrix>,
    /// `vᵢ` with `E(i) = vᵢvᵢ*`, when known.
    pub vectors: Option<Vec<ComplexMatrix>>,
}

impl Povm {
    /// Rank-one POVM from column vectors (`dim × 1` each).
    pub fn from_vectors(dim: usize, vectors: Vec<ComplexMatrix>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::DimensionMismatch("POVM has no outcomes".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.shape() != (dim, 1) {
                return Err(Error::DimensionMismatch(format!(
                    "vector {i} must have length {dim}, got {}x{}",
                    v.nrows(),
                    v.ncols()
                )));
            }
        }
        let effects = vectors.iter().map(|v| hermitian_part(&(v * v.adjoint()))).collect();
        Ok(Self {
            dim,
            effects,
            vectors: Some(vectors),
        })
    }

    pub fn from_effects(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = effects
            .first()
            .ok_or_else(|| Error::DimensionMismatch("POVM has no outcomes".into()))?
            .nrows();
        for (i, e) in effects.iter().enumerate() {
            if e.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!("effect {i} is not {dim}x{dim}")));
            }
        }
        Ok(Self {
            dim,
            effects,
            vectors: None,
        })
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    /// `‖Σ E(i) − I‖`.
    pub fn resolution_deviation(&self) -> f64 {
        let mut sum = zeros(self.dim, self.dim);
        for e in &self.effects {
            sum += e;
        }
        (sum - identity(self.dim)).norm()
    }

    /// Checks positivity of each effect and `‖Σ E(i) − I‖ ≤ psd_tol`.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        for e in &self.effects {
            let check = is_psd(e, tol)?;
            if !check.is_psd {
                return Err(Error::NotPsd {
                    min_eig: check.min_eig,
                    allowed: -tol.psd_tol * op_norm(e).max(1.0),
                });
            }
        }
        let deviation = self.resolution_deviation();
        if deviation.is_nan() || deviation > tol.psd_tol {
            return Err(Error::NotResolution { deviation });
        }
        Ok(())
    }

    /// The stored vectors, or `√λ · x` from each effect's top eigenpair when
    /// every effect has rank one.
    pub fn rank_one_vectors(&self, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
        if let Some(v) = &self.vectors {
            return Ok(v.clone());
        }
        self.effects
            .iter()
            .enumerate()
            .map(|(index, e)| {
                let eig = herm_eig(e, tol)?;
                let top = eig.max();
                let cutoff = tol.psd_tol * top.abs().max(1.0);
                if eig.values.iter().skip(1).any(|&l| l.abs() > cutoff) {
                    return Err(Error::EffectsNotRankOne { index });
                }
                Ok(eig.vectors.columns(0, 1) * crate::linalg::c64(top.max(0.0).sqrt(), 0.0))
            })
            .collect()
    }
}

/// Kraus operators `Eᵢ: C^in_dim → C^out_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() || in_dim == 0 || out_dim == 0 {
            return Err(Error::DimensionMismatch("channel needs Kraus operators and positive dimensions".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (out_dim, in_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} must be {out_dim}x{in_dim}, got {}x{}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
        })
    }

    /// `Σ Eᵢ*Eᵢ`.
    pub fn gram(&self) -> ComplexMatrix {
        let mut sum = zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        hermitian_part(&sum)
    }

    /// `‖Σ Eᵢ*Eᵢ − I‖`.
    pub fn trace_deviation(&self) -> f64 {
        (self.gram() - identity(self.in_dim)).norm()
    }

    /// `‖Σ Eᵢ*Eᵢ − I‖ ≤ psd_tol`.
    pub fn is_trace_preserving(&self, tol: &Tolerances) -> bool {
        self.trace_deviation() <= tol.psd_tol
    }

    /// `Σ Eᵢ ρ Eᵢ*`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::DimensionMismatch(format!(
                "channel input must be {0}x{0}",
                self.in_dim
            )));
        }
        let mut out = zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }
}

/// The unitaries in `diag(I, U₁) · J · diag(I, U₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Freedom {
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
}

impl Freedom {
    pub fn identity(n1: usize, n2: usize) -> Self {
        Self {
            u1: identity(n1),
            u2: identity(n2),
        }
    }

    fn check(&self, n1: usize, n2: usize) -> Result<()> {
        for (name, u, n) in [("u1", &self.u1, n1), ("u2", &self.u2, n2)] {
            if u.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "freedom {name} must be {n}x{n}, got {}x{}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let deviation = unitarity_defect(u);
            if deviation.is_nan() || deviation > UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilationResult {
    pub unitary: ComplexMatrix,
    /// Coordinates of the original input space inside the dilation space.
    pub system_embedding: Range<usize>,
    /// For channels, the number of ancilla blocks of size `out_dim` after
    /// padding; for POVMs, the dimension of the added space.
    pub ancilla_dim: usize,
    pub freedom: Freedom,
    /// Number of ancilla blocks holding the given Kraus operators.
    pub kraus_blocks: usize,
    /// Ancilla block holding `(I − Σ Eᵢ*Eᵢ)^{1/2}` for a trace-decreasing
    /// channel.
    pub absorbing_block: Option<usize>,
}

impl DilationResult {
    pub fn size(&self) -> usize {
        self.unitary.nrows()
    }

    /// `uᵢuᵢ*` for every column `uᵢ` of the unitary.
    pub fn pvm(&self) -> Vec<ComplexMatrix> {
        self.unitary
            .column_iter()
            .map(|c| {
                let u = c.into_owned();
                &u * u.adjoint()
            })
            .collect()
    }

    /// Output dimension of a channel dilation.
    pub fn output_dim(&self) -> usize {
        self.size() / self.ancilla_dim.max(1)
    }
}

/// Julia completion of `M = [v₁ … vₙ]`, with the system on the first `m`
/// coordinates. Columns `0..n` project onto the effects; columns `n..n+m`
/// compress to zero.
pub fn povm_dilate(povm: &Povm, freedom: Option<Freedom>, tol: &Tolerances) -> Result<DilationResult> {
    povm.validate(tol)?;
    let vectors = povm.rank_one_vectors(tol)?;
    let (m, n) = (povm.dim, vectors.len());
    let big_m = crate::linalg::hstack(&vectors)?;
    let freedom = freedom.unwrap_or_else(|| Freedom::identity(n, m));
    freedom.check(n, m)?;
    let d = defects(&big_m, tol)?;
    let j = julia_from_parts(&big_m, &d.d_t, &d.d_t_star);
    let unitary = direct_sum(&identity(m), &freedom.u1) * j * direct_sum(&identity(n), &freedom.u2);
    Ok(DilationResult {
        unitary,
        system_embedding: 0..m,
        ancilla_dim: n,
        freedom,
        kraus_blocks: 0,
        absorbing_block: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmReport {
    /// `max ‖FᵢFⱼ − δᵢⱼFᵢ‖`.
    pub orthogonality: f64,
    /// `‖Σ Fᵢ − I‖`.
    pub completeness: f64,
    /// `max ‖P Fᵢ P − E(i)‖`, with `E(i) = 0` past the POVM's outcomes.
    pub compression: f64,
    pub passed: bool,
}

pub fn povm_verify(result: &DilationResult, povm: &Povm) -> PovmReport {
    let f = result.pvm();
    let k = result.size();
    let mut orthogonality = 0.0_f64;
    let mut sum = zeros(k, k);
    for (i, fi) in f.iter().enumerate() {
        sum += fi;
        for (j, fj) in f.iter().enumerate().skip(i) {
            let prod = fi * fj;
            let dev = if i == j { (prod - fi).norm() } else { prod.norm() };
            orthogonality = orthogonality.max(dev);
        }
    }
    let completeness = (sum - identity(k)).norm();
    let r = result.system_embedding.clone();
    let m = r.len();
    let mut compression = 0.0_f64;
    for (i, fi) in f.iter().enumerate() {
        let c = fi.view((r.start, r.start), (m, m));
        let dev = match povm.effects.get(i) {
            Some(e) => (c - e).norm(),
            None => c.norm(),
        };
        compression = compression.max(dev);
    }
    if povm.outcomes() > f.len() {
        compression = f64::INFINITY;
    }
    let passed = orthogonality <= PROJECTOR_TOL
        && completeness <= PROJECTOR_TOL
        && compression <= COMPRESSION_TOL;
    PovmReport {
        orthogonality,
        completeness,
        compression,
        passed,
    }
}

/// Options for [`channel_dilate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelOptions {
    pub freedom: Option<Freedom>,
    /// Total number of ancilla blocks; identity padding is appended after
    /// the Julia operator to reach `out_dim · pad_to_ancilla`.
    pub pad_to_ancilla: Option<usize>,
    /// Dilate a trace-decreasing channel by routing the defect
    /// `(I − Σ Eᵢ*Eᵢ)^{1/2}` to an extra ancilla block.
    pub absorb: bool,
}

/// Dilation of a channel on `C^n → C^m` with `r` Kraus operators.
///
/// The unitary has size `r·m + n` before padding, and `U` applied to
/// `ρ ⊕ 0` (input on coordinates `0..n`) carries `Eᵢ ρ` into ancilla block
/// `i`. When `n` is not a multiple of `m`, identity padding is added up to
/// the next multiple.
pub fn channel_dilate(ch: &KrausChannel, opts: &ChannelOptions, tol: &Tolerances) -> Result<DilationResult> {
    let (n, m, r) = (ch.in_dim, ch.out_dim, ch.kraus.len());
    let deviation = ch.trace_deviation();
    let preserving = deviation <= tol.psd_tol;
    if !preserving && !opts.absorb {
        return Err(Error::NotTracePreserving { deviation });
    }
    if !preserving && n != m {
        return Err(Error::ShapeUnsupported(format!(
            "an absorbing outcome needs equal input and output dimensions, got {n} and {m}"
        )));
    }
    let t = vstack(&ch.kraus)?;
    let d = defects(&t, tol)?;
    let j = julia_from_parts(&t, &d.d_t, &d.d_t_star);
    let freedom = opts.freedom.clone().unwrap_or_else(|| Freedom::identity(n, r * m));
    freedom.check(n, r * m)?;
    let core = direct_sum(&identity(r * m), &freedom.u1) * j * direct_sum(&identity(n), &freedom.u2);

    let size = r * m + n;
    let minimum = size.div_ceil(m);
    let blocks = match opts.pad_to_ancilla {
        Some(k) if k < minimum => {
            return Err(Error::PaddingTooSmall {
                requested: k,
                minimum,
            })
        }
        Some(k) => k,
        None => minimum,
    };
    let pad = blocks * m - size;
    let unitary = if pad > 0 {
        direct_sum(&core, &identity(pad))
    } else {
        core
    };
    Ok(DilationResult {
        unitary,
        system_embedding: 0..n,
        ancilla_dim: blocks,
        freedom,
        kraus_blocks: r,
        absorbing_block: (!preserving).then_some(r),
    })
}

fn check_state(rho: &ComplexMatrix, n: usize, tol: &Tolerances) -> Result<()> {
    if rho.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "state must be {n}x{n}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let scale = rho.norm().max(1.0);
    if hermitian_asymmetry(rho) > tol.psd_tol * scale {
        return Err(Error::NotState("not Hermitian".into()));
    }
    let check = is_psd(&hermitian_part(rho), tol)?;
    if !check.is_psd {
        return Err(Error::NotState(format!("min eigenvalue {:.3e}", check.min_eig)));
    }
    let tr = trace(rho).re;
    if tr > 1.0 + tol.psd_tol * scale {
        return Err(Error::NotState(format!("trace {tr} exceeds one")));
    }
    Ok(())
}

/// Reduced output `Tr_anc(U (ρ ⊕ 0) U*)`.
pub fn channel_simulate(result: &DilationResult, rho: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    simulate_blocks(result, rho, None, tol)
}

/// As [`channel_simulate`], but keeping only the ancilla blocks of the given
/// Kraus operators; for a trace-decreasing channel this reproduces the
/// channel itself.
pub fn channel_simulate_kraus_only(
    result: &DilationResult,
    rho: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    simulate_blocks(result, rho, Some(result.kraus_blocks), tol)
}

fn simulate_blocks(
    result: &DilationResult,
    rho: &ComplexMatrix,
    keep: Option<usize>,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let emb = result.system_embedding.clone();
    check_state(rho, emb.len(), tol)?;
    let size = result.size();
    let k = result.ancilla_dim;
    if k == 0 || !size.is_multiple_of(k) {
        return Err(Error::DimensionMismatch(format!(
            "dilation of size {size} does not split into {k} ancilla blocks"
        )));
    }
    let m = size / k;
    // only the embedded columns of U act on ρ ⊕ 0
    let cols = result.unitary.columns(emb.start, emb.len());
    let image = cols * rho * cols.adjoint();
    let out = match keep {
        None => ptrace_first(&image, k, m)?,
        Some(b) => {
            let mut acc = zeros(m, m);
            for a in 0..b.min(k) {
                acc += image.view((a * m, a * m), (m, m));
            }
            acc
        }
    };
    Ok(hermitian_part(&out))
}
