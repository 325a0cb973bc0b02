//! Unitary matrices as `diag(I, Γ₃) · J(Γ₁) · diag(I, Γ₂)`.
//!
//! For `U = [[A, B], [C, D]]` with `B` and `C` square, `Γ₁ = A`; since
//! `AA* + BB* = I` the block `B` is `D_{A*}` times a unitary, and `Γ₂` is the
//! unitary polar factor of `B`. `Γ₃` then follows from the first block
//! column of `U`.

use super::BlockShape;
use crate::contraction::{clip_to_contraction, defects, julia_from_parts};
use crate::error::{Error, Result};
use crate::linalg::{direct_sum, identity, polar_unitary, unitarity_defect, ComplexMatrix, Tolerances};

/// Largest `‖U*U − I‖` accepted as unitary.
const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryFactors {
    /// Contraction, the `(0, 0)` block of `U`.
    pub gamma1: ComplexMatrix,
    /// Unitary acting on the second block column.
    pub gamma2: ComplexMatrix,
    /// Unitary acting on the second block row.
    pub gamma3: ComplexMatrix,
}

impl UnitaryFactors {
    /// `diag(I, Γ₃) · J(Γ₁) · diag(I, Γ₂)`.
    pub fn reassemble(&self, tol: &Tolerances) -> Result<ComplexMatrix> {
        let (r1, c1) = self.gamma1.shape();
        let d = defects(&self.gamma1, tol)?;
        let j = julia_from_parts(&self.gamma1, &d.d_t, &d.d_t_star);
        Ok(direct_sum(&identity(r1), &self.gamma3) * j * direct_sum(&identity(c1), &self.gamma2))
    }
}

pub fn unitary_factorize(
    u: &ComplexMatrix,
    shape: &BlockShape,
    tol: &Tolerances,
) -> Result<UnitaryFactors> {
    shape.check(u)?;
    if shape.row_dims.len() != 2 || shape.col_dims.len() != 2 {
        return Err(Error::ShapeUnsupported("unitary factorization needs 2x2 blocks".into()));
    }
    let ([r1, r2], [c1, c2]) = ([shape.row_dims[0], shape.row_dims[1]], [shape.col_dims[0], shape.col_dims[1]]);
    if r1 != c2 || r2 != c1 {
        return Err(Error::ShapeUnsupported(format!(
            "off-diagonal blocks must be square, got {r1}x{c2} and {r2}x{c1}"
        )));
    }
    let deviation = unitarity_defect(u);
    if deviation.is_nan() || deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let gamma1 = clip_to_contraction(shape.block(u, 0, 0), tol)?;
    let gamma2 = polar_unitary(&shape.block(u, 0, 1))?;
    let d = defects(&gamma1, tol)?;
    let c = shape.block(u, 1, 0);
    let dd = shape.block(u, 1, 1);
    // [C, D] restricted to the co-isometry [D_{Γ₁}, −Γ₁*Γ₂]
    let gamma3 = c * &d.d_t - dd * gamma2.adjoint() * &gamma1;
    Ok(UnitaryFactors {
        gamma1,
        gamma2,
        gamma3,
    })
}
