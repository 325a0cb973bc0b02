//! Defect operators, the Julia operator, and the two factorization lemmas
//! every parametrization in the crate is built from.
//!
//! For a contraction `T` the defect operators are `D_T = (I − T*T)^{1/2}` and
//! `D_{T*} = (I − TT*)^{1/2}`. Both are computed from one SVD of `T`, so the
//! intertwining `T D_T = D_{T*} T` holds to rounding even when `T` has
//! singular values close to one.

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_part, identity, is_psd, op_norm, pinv, svd, ComplexMatrix, Tolerances,
};

/// `1 − σ²` at or below this is treated as an exact isometric direction.
const ISOMETRIC_SNAP: f64 = 4096.0 * f64::EPSILON;

/// `D_T` and `D_{T*}` of a contraction `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectPair {
    /// `(I − T*T)^{1/2}`, side `cols(T)`.
    pub d_t: ComplexMatrix,
    /// `(I − TT*)^{1/2}`, side `rows(T)`.
    pub d_t_star: ComplexMatrix,
}

fn defect_value(sigma: f64) -> f64 {
    let gap = 1.0 - sigma.min(1.0).powi(2);
    if gap <= ISOMETRIC_SNAP {
        0.0
    } else {
        gap.sqrt()
    }
}

/// Fails with [`Error::NotContraction`] when `‖T‖₂ > 1 + psd_tol`.
pub fn ensure_contraction(t: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let norm = op_norm(t);
    let allowed = 1.0 + tol.psd_tol;
    if norm.is_nan() || norm > allowed {
        return Err(Error::NotContraction { norm, allowed });
    }
    Ok(norm)
}

pub fn defects(t: &ComplexMatrix, tol: &Tolerances) -> Result<DefectPair> {
    ensure_contraction(t, tol)?;
    let (rows, cols) = t.shape();
    let s = svd(t)?;
    // D = I + W diag(d − 1) W* over the thin singular vectors; directions
    // outside the thin factor have singular value 0 and defect 1. When the
    // thin factor spans the space, W diag(d) W* is used so isometric
    // directions give an exact zero.
    let shift = |w: &ComplexMatrix, n: usize| {
        let full = w.ncols() == n;
        let mut scaled = w.clone();
        for (j, &sj) in s.sigma.iter().enumerate() {
            let d = defect_value(sj);
            scaled.column_mut(j).scale_mut(if full { d } else { d - 1.0 });
        }
        let body = scaled * w.adjoint();
        hermitian_part(&if full { body } else { identity(n) + body })
    };
    Ok(DefectPair {
        d_t: shift(&s.v, cols),
        d_t_star: shift(&s.u, rows),
    })
}

/// `D_T` alone.
pub fn defect(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(defects(t, tol)?.d_t)
}

/// `D_{T*}` alone.
pub fn defect_star(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(defects(t, tol)?.d_t_star)
}

/// The Julia operator `[[T, D_{T*}], [D_T, −T*]]`.
///
/// For `T: C^c → C^r` the result maps `C^c ⊕ C^r` onto `C^r ⊕ C^c` and is
/// unitary.
pub fn julia(t: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let DefectPair { d_t, d_t_star } = defects(t, tol)?;
    Ok(julia_from_parts(t, &d_t, &d_t_star))
}

pub(crate) fn julia_from_parts(
    t: &ComplexMatrix,
    d_t: &ComplexMatrix,
    d_t_star: &ComplexMatrix,
) -> ComplexMatrix {
    let (r, c) = t.shape();
    let mut j = ComplexMatrix::zeros(r + c, c + r);
    j.view_mut((0, 0), (r, c)).copy_from(t);
    j.view_mut((0, c), (r, r)).copy_from(d_t_star);
    j.view_mut((r, 0), (c, c)).copy_from(d_t);
    j.view_mut((r, c), (c, r)).copy_from(&(-t.adjoint()));
    j
}

/// Clips singular values in `(1, 1 + slack]` back to one; rejects anything
/// larger.
pub(crate) fn clip_to_contraction(g: ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let norm = op_norm(&g);
    if norm <= 1.0 {
        return Ok(g);
    }
    let allowed = 1.0 + tol.contraction_slack;
    if norm.is_nan() || norm > allowed {
        return Err(Error::NoFactor { norm, allowed });
    }
    clip_singular_values(g)
}

/// `g` with every singular value above one set to one.
fn clip_singular_values(g: ComplexMatrix) -> Result<ComplexMatrix> {
    let s = svd(&g)?;
    let mut scaled = s.u.clone();
    for (j, &sj) in s.sigma.iter().enumerate() {
        scaled.column_mut(j).scale_mut(sj.min(1.0) - sj);
    }
    Ok(g + scaled * s.v.adjoint())
}

/// Singular values of `X` below `psd_tol · ‖X‖` are rounding noise from the
/// products of defect operators that `X` usually is; their singular vectors
/// are not paired reliably, so the pseudoinverse drops them.
fn solve_tolerances(tol: &Tolerances) -> Tolerances {
    Tolerances {
        rank_tol: Some(tol.rank_tol.map_or(tol.psd_tol, |t| t.max(tol.psd_tol))),
        ..*tol
    }
}

/// Solves `Γ X = Y` for a contraction `Γ`.
///
/// A contractive solution exists iff `Y*Y ≤ X*X`; the returned solution is
/// `Y X⁺`, the one vanishing on `(Ran X)^⊥`.
pub fn solve_contraction_factor(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "ΓX = Y needs equal column counts, got {} and {}",
            x.ncols(),
            y.ncols()
        )));
    }
    let gamma = y * pinv(x, &solve_tolerances(tol))?;
    let gram_x = x.adjoint() * x;
    let diff = &gram_x - y.adjoint() * y;
    let scale = op_norm(&gram_x).max(1.0);
    let slack = tol.psd_tol * scale;
    let check = is_psd(&(diff + identity(x.ncols()) * crate::linalg::c64(slack, 0.0)), tol)?;
    let norm = op_norm(&gamma);
    let allowed = 1.0 + tol.contraction_slack;
    if !check.is_psd {
        return Err(Error::NoFactor { norm, allowed });
    }
    if norm <= allowed {
        return clip_to_contraction(gamma, tol);
    }
    // Y*Y ≤ X*X holds to tolerance, so the excess comes from singular values
    // of X at rounding level; clipping is accepted if ΓX still matches Y
    let clipped = clip_singular_values(gamma)?;
    let residual = (&clipped * x - y).norm();
    if residual <= tol.recon_tol * y.norm().max(1.0) {
        Ok(clipped)
    } else {
        Err(Error::NoFactor { norm, allowed })
    }
}

/// Solves `X Γ = Y` for a contraction `Γ` (the adjoint form of
/// [`solve_contraction_factor`]); the solution is `X⁺ Y`.
pub fn solve_left_contraction_factor(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    Ok(solve_contraction_factor(&x.adjoint(), &y.adjoint(), tol)?.adjoint())
}

/// Partial isometry `V` with `V X = Y`, normalized to vanish on `(Ran X)^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialIsometryFactor {
    pub v: ComplexMatrix,
    /// Dimension of the initial space `cl(Ran X)`.
    pub initial_rank: usize,
}

/// Requires `X*X = Y*Y` up to `psd_tol · ‖X*X‖`.
pub fn solve_partial_isometry(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<PartialIsometryFactor> {
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "VX = Y needs equal column counts, got {} and {}",
            x.ncols(),
            y.ncols()
        )));
    }
    let gram_x = x.adjoint() * x;
    let deviation = (&gram_x - y.adjoint() * y).norm();
    let allowed = tol.psd_tol * gram_x.norm().max(f64::MIN_POSITIVE);
    if deviation > allowed {
        return Err(Error::NotEquinormed { deviation, allowed });
    }
    let raw = y * pinv(x, tol)?;
    // singular values of Y X⁺ are 0 or 1 up to rounding; snap them
    let s = svd(&raw)?;
    let mut kept = s.u.clone();
    let mut rank = 0;
    for (j, &sj) in s.sigma.iter().enumerate() {
        if sj > 0.5 {
            rank += 1;
        } else {
            kept.column_mut(j).fill(crate::linalg::ZERO);
        }
    }
    Ok(PartialIsometryFactor {
        v: kept * s.v.adjoint(),
        initial_rank: rank,
    })
}
