//! Row contractions `[T₁, …, Tₙ]` and column contractions `[T₁; …; Tₙ]`.
//!
//! A row contraction is `Tₖ = D_{Γ₁*} ⋯ D_{Γₖ₋₁*} Γₖ`; a column contraction
//! is `Tₖ = Γₖ D_{Γₖ₋₁} ⋯ D_{Γ₁}`. The column case is the row case of the
//! adjoint with every `Γ` replaced by its adjoint.

use super::{expect_shape, BlockShape};
use crate::contraction::{
    clip_to_contraction, defects, ensure_contraction, solve_left_contraction_factor, DefectPair,
};
use crate::error::{Error, Result};
use crate::linalg::{hstack, identity, vstack, zeros, ComplexMatrix, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Row,
    Column,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowColParams {
    pub orientation: Orientation,
    pub gammas: Vec<ComplexMatrix>,
    pub shape: BlockShape,
}

/// Triangular factors of the two defect squares:
/// `d_t d_t* = I − T*T` and `d_t_star d_t_star* = I − TT*`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectFactors {
    pub d_t: ComplexMatrix,
    pub d_t_star: ComplexMatrix,
}

impl RowColParams {
    /// Checks that every `Γₖ` has the size the shape dictates.
    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        let (outer, parts) = match self.orientation {
            Orientation::Row => (&self.shape.row_dims, &self.shape.col_dims),
            Orientation::Column => (&self.shape.col_dims, &self.shape.row_dims),
        };
        if outer.len() != 1 {
            return Err(Error::ShapeUnsupported(format!(
                "{:?} parameters need a single outer block, got {}",
                self.orientation,
                outer.len()
            )));
        }
        if self.gammas.len() != parts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks but {} gammas",
                parts.len(),
                self.gammas.len()
            )));
        }
        for (k, (g, &d)) in self.gammas.iter().zip(parts).enumerate() {
            let (r, c) = match self.orientation {
                Orientation::Row => (outer[0], d),
                Orientation::Column => (d, outer[0]),
            };
            expect_shape(g, r, c, &format!("gamma {k}"))?;
        }
        Ok(())
    }

    pub fn reconstruct(&self, tol: &Tolerances) -> Result<ComplexMatrix> {
        match self.orientation {
            Orientation::Row => row_reconstruct(self, tol),
            Orientation::Column => col_reconstruct(self, tol),
        }
    }

    pub fn defect_factors(&self, tol: &Tolerances) -> Result<DefectFactors> {
        match self.orientation {
            Orientation::Row => row_defect_factors(self, tol),
            Orientation::Column => col_defect_factors(self, tol),
        }
    }

    /// The same operator seen through its adjoint: a row becomes a column
    /// and each `Γ` is replaced by `Γ*`.
    pub fn adjoint(&self) -> Self {
        Self {
            orientation: match self.orientation {
                Orientation::Row => Orientation::Column,
                Orientation::Column => Orientation::Row,
            },
            gammas: self.gammas.iter().map(|g| g.adjoint()).collect(),
            shape: self.shape.transposed(),
        }
    }
}

fn require(params: &RowColParams, orientation: Orientation) -> Result<()> {
    if params.orientation != orientation {
        return Err(Error::UnsupportedCombination(format!(
            "expected {orientation:?} parameters, got {:?}",
            params.orientation
        )));
    }
    params.validate()
}

/// Extracts `Γ₁ = T₁`, then `Γₖ = (D_{Γ₁*} ⋯ D_{Γₖ₋₁*})⁺ Tₖ`.
pub fn row_parametrize(
    t: &ComplexMatrix,
    shape: &BlockShape,
    tol: &Tolerances,
) -> Result<RowColParams> {
    shape.check(t)?;
    if shape.row_dims.len() != 1 {
        return Err(Error::ShapeUnsupported(format!(
            "row parametrization needs one block row, got {}",
            shape.row_dims.len()
        )));
    }
    ensure_contraction(t, tol)?;
    let rows = shape.row_dims[0];
    let mut acc = identity(rows);
    let mut gammas = Vec::with_capacity(shape.col_dims.len());
    for k in 0..shape.col_dims.len() {
        let tk = shape.block(t, 0, k);
        let gamma = if k == 0 {
            clip_to_contraction(tk, tol)?
        } else {
            solve_left_contraction_factor(&acc, &tk, tol)?
        };
        acc *= defects(&gamma, tol)?.d_t_star;
        gammas.push(gamma);
    }
    Ok(RowColParams {
        orientation: Orientation::Row,
        gammas,
        shape: shape.clone(),
    })
}

pub fn row_reconstruct(params: &RowColParams, tol: &Tolerances) -> Result<ComplexMatrix> {
    require(params, Orientation::Row)?;
    let rows = params.shape.row_dims[0];
    let mut acc = identity(rows);
    let mut blocks = Vec::with_capacity(params.gammas.len());
    for gamma in &params.gammas {
        let d = defects(gamma, tol)?;
        blocks.push(&acc * gamma);
        acc *= d.d_t_star;
    }
    hstack(&blocks)
}

pub fn col_parametrize(
    t: &ComplexMatrix,
    shape: &BlockShape,
    tol: &Tolerances,
) -> Result<RowColParams> {
    shape.check(t)?;
    if shape.col_dims.len() != 1 {
        return Err(Error::ShapeUnsupported(format!(
            "column parametrization needs one block column, got {}",
            shape.col_dims.len()
        )));
    }
    Ok(row_parametrize(&t.adjoint(), &shape.transposed(), tol)?.adjoint())
}

pub fn col_reconstruct(params: &RowColParams, tol: &Tolerances) -> Result<ComplexMatrix> {
    require(params, Orientation::Column)?;
    let cols = params.shape.col_dims[0];
    let mut acc = identity(cols);
    let mut blocks = Vec::with_capacity(params.gammas.len());
    for gamma in &params.gammas {
        let d = defects(gamma, tol)?;
        blocks.push(gamma * &acc);
        acc = d.d_t * acc;
    }
    vstack(&blocks)
}

/// For a row contraction: `d_t` is block lower triangular with diagonal
/// `D_{Γᵢ}` and entries `−Γᵢ* D_{Γᵢ₋₁*} ⋯ D_{Γⱼ₊₁*} Γⱼ` below it;
/// `d_t_star = D_{Γ₁*} ⋯ D_{Γₙ*}`.
pub fn row_defect_factors(params: &RowColParams, tol: &Tolerances) -> Result<DefectFactors> {
    require(params, Orientation::Row)?;
    let n = params.gammas.len();
    let pairs: Vec<DefectPair> = params
        .gammas
        .iter()
        .map(|g| defects(g, tol))
        .collect::<Result<_>>()?;
    let dims = &params.shape.col_dims;
    let offsets: Vec<usize> = (0..n).map(|i| params.shape.col_offset(i)).collect();
    let total = params.shape.total_cols();
    let mut lower = zeros(total, total);
    for j in 0..n {
        lower
            .view_mut((offsets[j], offsets[j]), (dims[j], dims[j]))
            .copy_from(&pairs[j].d_t);
        let mut run = params.gammas[j].clone();
        for i in j + 1..n {
            let entry = -(params.gammas[i].adjoint() * &run);
            lower
                .view_mut((offsets[i], offsets[j]), (dims[i], dims[j]))
                .copy_from(&entry);
            run = &pairs[i].d_t_star * run;
        }
    }
    let mut product = identity(params.shape.row_dims[0]);
    for p in &pairs {
        product *= &p.d_t_star;
    }
    Ok(DefectFactors {
        d_t: lower,
        d_t_star: product,
    })
}

/// Mirror of [`row_defect_factors`]: `d_t = D_{Γ₁} ⋯ D_{Γₙ}` and `d_t_star`
/// is block lower triangular with diagonal `D_{Γᵢ*}` and entries
/// `−Γᵢ D_{Γᵢ₋₁} ⋯ D_{Γⱼ₊₁} Γⱼ*`.
pub fn col_defect_factors(params: &RowColParams, tol: &Tolerances) -> Result<DefectFactors> {
    require(params, Orientation::Column)?;
    let row = row_defect_factors(&params.adjoint(), tol)?;
    Ok(DefectFactors {
        d_t: row.d_t_star,
        d_t_star: row.d_t,
    })
}
