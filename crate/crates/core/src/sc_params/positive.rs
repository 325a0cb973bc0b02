//! Positive block matrices and their lattice of contractions.
//!
//! For `A = [Aᵢⱼ] ≥ 0` the parameters are the positive roots `Lᵢᵢ = Aᵢᵢ^{1/2}`
//! and one row contraction `Rₖ = [Γₖ,ₖ₊₁, …, Γₖ,ₙ]` per block row. They are
//! extracted bottom-up: with `Lₖ₊₁` the upper triangular factor of the
//! trailing principal block (`Aₖ₊₁.. = Lₖ₊₁*Lₖ₊₁`), `Rₖ = Lₖₖ⁺ [Aₖ,ₖ₊₁ …] Lₖ₊₁⁺`
//! and
//!
//! ```text
//! Lₖ = [[Lₖₖ, Rₖ Lₖ₊₁], [0, Xₖ Lₖ₊₁]],   Xₖ*Xₖ = D_{Rₖ}²,
//! ```
//!
//! where `Xₖ` is the adjoint of the lower triangular defect factor of `Rₖ`.
//! `L₁` is block upper triangular and `A = L₁*L₁`.

use super::matrix::{matrix_reconstruct, MatrixContractionParams};
use super::rowcol::{row_defect_factors, row_parametrize, row_reconstruct};
use super::{expect_shape, BlockShape, Orientation, RowColParams};
use crate::contraction::solve_left_contraction_factor;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermitian_part, identity, is_psd, op_norm, pinv, sqrt_psd, zeros, ComplexMatrix,
    Tolerances,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSCParams {
    /// `Lᵢᵢ = Aᵢᵢ^{1/2}`.
    pub diag_roots: Vec<ComplexMatrix>,
    /// `gammas[i][t]` is `Γᵢ,ᵢ₊₁₊ₜ`; the last row is empty.
    pub gammas: Vec<Vec<ComplexMatrix>>,
    pub shape: BlockShape,
}

impl PositiveSCParams {
    pub fn blocks(&self) -> usize {
        self.diag_roots.len()
    }

    /// `Γᵢⱼ` for `i < j`.
    pub fn gamma(&self, i: usize, j: usize) -> &ComplexMatrix {
        assert!(i < j, "only the strict upper triangle is parametrized");
        &self.gammas[i][j - i - 1]
    }

    /// The row contraction `Rₖ = [Γₖ,ₖ₊₁, …, Γₖ,ₙ]` as row parameters.
    pub fn row(&self, k: usize) -> RowColParams {
        let dims = &self.shape.row_dims;
        RowColParams {
            orientation: Orientation::Row,
            gammas: self.gammas[k].clone(),
            shape: BlockShape {
                row_dims: vec![dims[k]],
                col_dims: dims[k + 1..].to_vec(),
            },
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        self.shape.validate()?;
        if !self.shape.is_square() {
            return Err(Error::ShapeUnsupported("positive parameters need a square shape".into()));
        }
        let dims = &self.shape.row_dims;
        let n = dims.len();
        if self.diag_roots.len() != n || self.gammas.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} blocks but {} roots and {} gamma rows",
                self.diag_roots.len(),
                self.gammas.len()
            )));
        }
        for (i, root) in self.diag_roots.iter().enumerate() {
            expect_shape(root, dims[i], dims[i], &format!("diagonal root {i}"))?;
            let check = is_psd(root, tol)?;
            if !check.is_psd {
                return Err(Error::NotPsd {
                    min_eig: check.min_eig,
                    allowed: -tol.psd_tol * op_norm(root).max(1.0),
                });
            }
        }
        for i in 0..n {
            if self.gammas[i].len() != n - i - 1 {
                return Err(Error::DimensionMismatch(format!(
                    "gamma row {i} needs {} entries, got {}",
                    n - i - 1,
                    self.gammas[i].len()
                )));
            }
            for (t, g) in self.gammas[i].iter().enumerate() {
                expect_shape(g, dims[i], dims[i + 1 + t], &format!("gamma ({i}, {})", i + 1 + t))?;
            }
        }
        Ok(())
    }
}

/// Square roots carry the eigenvalue noise `psd_tol · ‖A‖` as singular
/// values of size `√psd_tol`; the pseudoinverses of roots and factors cut
/// below that level so the noise is not amplified.
fn factor_tolerances(tol: &Tolerances) -> Tolerances {
    let floor = tol.psd_tol.sqrt();
    Tolerances {
        rank_tol: Some(tol.rank_tol.map_or(floor, |t| t.max(floor))),
        ..*tol
    }
}

/// One step up the recursion: `[[Lₖₖ, R Lₖ₊₁], [0, X Lₖ₊₁]]`.
fn extend_factor(
    root: &ComplexMatrix,
    row: &RowColParams,
    trailing: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let r = row_reconstruct(row, tol)?;
    let x = row_defect_factors(row, tol)?.d_t.adjoint();
    let (d, rest) = (root.nrows(), trailing.nrows());
    let mut l = zeros(d + rest, d + rest);
    l.view_mut((0, 0), (d, d)).copy_from(root);
    l.view_mut((0, d), (d, rest)).copy_from(&(r * trailing));
    l.view_mut((d, d), (rest, rest)).copy_from(&(x * trailing));
    Ok(l)
}

pub fn psd_parametrize(
    a: &ComplexMatrix,
    shape: &BlockShape,
    tol: &Tolerances,
) -> Result<PositiveSCParams> {
    shape.check(a)?;
    if !shape.is_square() {
        return Err(Error::ShapeUnsupported("positive parametrization needs a square shape".into()));
    }
    let check = is_psd(a, tol)?;
    if !check.is_psd {
        return Err(Error::NotPsd {
            min_eig: check.min_eig,
            allowed: -tol.psd_tol * op_norm(a).max(1.0),
        });
    }
    let a = hermitian_part(a);
    let ftol = factor_tolerances(tol);
    let tol = &ftol;
    let dims = &shape.row_dims;
    let n = dims.len();
    let diag_roots: Vec<ComplexMatrix> = (0..n)
        .map(|i| sqrt_psd(&shape.block(&a, i, i), tol))
        .collect::<Result<_>>()?;
    let mut gammas = vec![Vec::new(); n];
    let mut trailing = diag_roots[n - 1].clone();
    for k in (0..n - 1).rev() {
        let start = shape.row_offset(k + 1);
        let across = a
            .view((shape.row_offset(k), start), (dims[k], shape.total_rows() - start))
            .into_owned();
        // Lₖₖ R Lₖ₊₁ = [Aₖ,ₖ₊₁ …]
        let z = across * pinv(&trailing, tol)?;
        let r = solve_left_contraction_factor(&diag_roots[k], &z, tol)?;
        let row_shape = BlockShape::row(dims[k], dims[k + 1..].to_vec())?;
        let row = row_parametrize(&r, &row_shape, tol)?;
        trailing = extend_factor(&diag_roots[k], &row, &trailing, tol)?;
        gammas[k] = row.gammas;
    }
    Ok(PositiveSCParams {
        diag_roots,
        gammas,
        shape: shape.clone(),
    })
}

/// Block upper triangular `L` with `L*L` the parametrized matrix.
pub fn psd_cholesky(params: &PositiveSCParams, tol: &Tolerances) -> Result<ComplexMatrix> {
    params.validate(tol)?;
    let n = params.blocks();
    let mut trailing = params.diag_roots[n - 1].clone();
    for k in (0..n - 1).rev() {
        trailing = extend_factor(&params.diag_roots[k], &params.row(k), &trailing, tol)?;
    }
    Ok(trailing)
}

pub fn psd_reconstruct(params: &PositiveSCParams, tol: &Tolerances) -> Result<ComplexMatrix> {
    let l = psd_cholesky(params, tol)?;
    Ok(hermitian_part(&(l.adjoint() * l)))
}

/// Parameters of `M ⊗ B*B` from the parameters of a scalar-block `M`:
/// `Γᵢⱼ ↦ γᵢⱼ I` and `Lᵢᵢ ↦ √mᵢᵢ (B*B)^{1/2}`.
pub fn tensor_sc(
    params_scalar: &PositiveSCParams,
    b: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<PositiveSCParams> {
    params_scalar.validate(tol)?;
    if params_scalar.shape.row_dims.iter().any(|&d| d != 1) {
        return Err(Error::ShapeUnsupported("tensor lift needs 1x1 blocks".into()));
    }
    let d = b.ncols();
    let root = sqrt_psd(&hermitian_part(&(b.adjoint() * b)), tol)?;
    let diag_roots = params_scalar
        .diag_roots
        .iter()
        .map(|l| &root * c64(l[(0, 0)].re, 0.0))
        .collect();
    let gammas = params_scalar
        .gammas
        .iter()
        .map(|row| row.iter().map(|g| identity(d) * g[(0, 0)]).collect())
        .collect();
    Ok(PositiveSCParams {
        diag_roots,
        gammas,
        shape: BlockShape::square(vec![d; params_scalar.blocks()])?,
    })
}

/// `B = Γ L` for `L = psd_cholesky(A)`; then `B*B ≤ A`.
pub fn dominated_factor(
    a_params: &PositiveSCParams,
    gamma_params: &MatrixContractionParams,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let l = psd_cholesky(a_params, tol)?;
    let gamma = matrix_reconstruct(gamma_params, tol)?;
    if gamma.ncols() != l.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "contraction has {} columns but the factor has side {}",
            gamma.ncols(),
            l.nrows()
        )));
    }
    Ok(gamma * l)
}
