//! Schur parameters of row, column and matrix contractions, unitary matrices
//! and positive block matrices.
//!
//! Every parametrization stores a family of contractions `Γ` from which the
//! source operator is rebuilt by products of `Γ`s and their defect operators.
//! Extraction goes through pseudoinverse solves, so the stored `Γ` is the
//! representative that vanishes off the relevant range.

mod matrix;
mod positive;
mod rowcol;
mod unitary;

pub use matrix::{
    closed_form_2x2, matrix_defects_2x2, matrix_parametrize, matrix_reconstruct,
    MatrixContractionParams,
};
pub use positive::{
    dominated_factor, psd_cholesky, psd_parametrize, psd_reconstruct, tensor_sc,
    PositiveSCParams,
};
pub use rowcol::{
    col_defect_factors, col_parametrize, col_reconstruct, row_defect_factors, row_parametrize,
    row_reconstruct, DefectFactors, Orientation, RowColParams,
};
pub use unitary::{unitary_factorize, UnitaryFactors};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerances};

/// Row and column partition of a block operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
}

impl BlockShape {
    pub fn new(row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        let shape = Self { row_dims, col_dims };
        shape.validate()?;
        Ok(shape)
    }

    /// Shape `[rows] × col_dims`.
    pub fn row(rows: usize, col_dims: Vec<usize>) -> Result<Self> {
        Self::new(vec![rows], col_dims)
    }

    /// Shape `row_dims × [cols]`.
    pub fn column(row_dims: Vec<usize>, cols: usize) -> Result<Self> {
        Self::new(row_dims, vec![cols])
    }

    /// Same partition on both sides.
    pub fn square(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims.clone(), dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.row_dims.is_empty() || self.col_dims.is_empty() {
            return Err(Error::DimensionMismatch("block shape has no blocks".into()));
        }
        if self.row_dims.iter().chain(&self.col_dims).any(|&d| d == 0) {
            return Err(Error::DimensionMismatch("block dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn total_rows(&self) -> usize {
        self.row_dims.iter().sum()
    }

    pub fn total_cols(&self) -> usize {
        self.col_dims.iter().sum()
    }

    pub fn row_offset(&self, i: usize) -> usize {
        self.row_dims[..i].iter().sum()
    }

    pub fn col_offset(&self, j: usize) -> usize {
        self.col_dims[..j].iter().sum()
    }

    pub fn is_square(&self) -> bool {
        self.row_dims == self.col_dims
    }

    /// Fails unless `a` has exactly the total size of the shape.
    pub fn check(&self, a: &ComplexMatrix) -> Result<()> {
        self.validate()?;
        if a.shape() != (self.total_rows(), self.total_cols()) {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but the block shape is {}x{}",
                a.nrows(),
                a.ncols(),
                self.total_rows(),
                self.total_cols()
            )));
        }
        Ok(())
    }

    /// Copy of block `(i, j)`.
    pub fn block(&self, a: &ComplexMatrix, i: usize, j: usize) -> ComplexMatrix {
        a.view(
            (self.row_offset(i), self.col_offset(j)),
            (self.row_dims[i], self.col_dims[j]),
        )
        .into_owned()
    }

    pub fn set_block(&self, a: &mut ComplexMatrix, i: usize, j: usize, b: &ComplexMatrix) {
        a.view_mut(
            (self.row_offset(i), self.col_offset(j)),
            (self.row_dims[i], self.col_dims[j]),
        )
        .copy_from(b);
    }

    pub fn transposed(&self) -> Self {
        Self {
            row_dims: self.col_dims.clone(),
            col_dims: self.row_dims.clone(),
        }
    }
}

/// The four parametrizable kinds of block operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Row,
    Column,
    Matrix,
    Psd,
}

impl ParamKind {
    pub fn name(self) -> &'static str {
        match self {
            ParamKind::Row => "row",
            ParamKind::Column => "column",
            ParamKind::Matrix => "matrix",
            ParamKind::Psd => "psd",
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(ParamKind::Row),
            "column" => Ok(ParamKind::Column),
            "matrix" => Ok(ParamKind::Matrix),
            "psd" => Ok(ParamKind::Psd),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// Parameters of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    RowCol(RowColParams),
    Matrix(MatrixContractionParams),
    Psd(PositiveSCParams),
}

impl Params {
    pub fn kind(&self) -> ParamKind {
        match self {
            Params::RowCol(p) if p.orientation == Orientation::Row => ParamKind::Row,
            Params::RowCol(_) => ParamKind::Column,
            Params::Matrix(_) => ParamKind::Matrix,
            Params::Psd(_) => ParamKind::Psd,
        }
    }

    pub fn shape(&self) -> &BlockShape {
        match self {
            Params::RowCol(p) => &p.shape,
            Params::Matrix(p) => &p.shape,
            Params::Psd(p) => &p.shape,
        }
    }

    pub fn reconstruct(&self, tol: &Tolerances) -> Result<ComplexMatrix> {
        match self {
            Params::RowCol(p) => p.reconstruct(tol),
            Params::Matrix(p) => matrix_reconstruct(p, tol),
            Params::Psd(p) => psd_reconstruct(p, tol),
        }
    }
}

pub fn parametrize(
    kind: ParamKind,
    a: &ComplexMatrix,
    shape: &BlockShape,
    tol: &Tolerances,
) -> Result<Params> {
    Ok(match kind {
        ParamKind::Row => Params::RowCol(row_parametrize(a, shape, tol)?),
        ParamKind::Column => Params::RowCol(col_parametrize(a, shape, tol)?),
        ParamKind::Matrix => Params::Matrix(matrix_parametrize(a, shape, tol)?),
        ParamKind::Psd => Params::Psd(psd_parametrize(a, shape, tol)?),
    })
}

/// Fails with [`Error::DimensionMismatch`] unless `g` is `rows × cols`.
fn expect_shape(g: &ComplexMatrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if g.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {rows}x{cols}, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    Ok(())
}
