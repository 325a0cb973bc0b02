//! JSON forms of matrices, parameter sets, POVMs, channels and dilations.
//!
//! Matrices are `{"rows": r, "cols": c, "data": [[re, im], ...]}` in
//! row-major order. Floats are written in shortest round-trip form, so a
//! write/read cycle is exact.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dilation::{DilationResult, Freedom, KrausChannel, Povm};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, Tolerances};
use crate::sc_params::{
    BlockShape, MatrixContractionParams, Orientation, ParamKind, Params, PositiveSCParams,
    RowColParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(a: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(a.len());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let z = a[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            data,
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidMatrix(format!(
                "{}x{} matrix with {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c64(re, im)
        }))
    }
}

fn matrices(list: &[MatrixJson]) -> Result<Vec<ComplexMatrix>> {
    list.iter().map(MatrixJson::to_matrix).collect()
}

fn jsons(list: &[ComplexMatrix]) -> Vec<MatrixJson> {
    list.iter().map(MatrixJson::from).collect()
}

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::InvalidMatrix(format!("JSON: {e}")))
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("JSON encoding of plain data")
}

pub fn matrix_to_string(a: &ComplexMatrix) -> String {
    to_string(&MatrixJson::from(a))
}

pub fn matrix_from_str(s: &str) -> Result<ComplexMatrix> {
    from_str::<MatrixJson>(s)?.to_matrix()
}

/// Parameter set. `gammas` is the row list for row and column kinds, the
/// block grid in row-major order for the matrix kind, and the strict upper
/// triangle in row-major order for the psd kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsJson {
    pub kind: ParamKind,
    pub shape: BlockShape,
    pub gammas: Vec<MatrixJson>,
    #[serde(default)]
    pub diag_roots: Vec<MatrixJson>,
}

impl From<&Params> for ParamsJson {
    fn from(p: &Params) -> Self {
        let (gammas, diag_roots) = match p {
            Params::RowCol(p) => (jsons(&p.gammas), Vec::new()),
            Params::Matrix(p) => (p.gammas.iter().flat_map(|row| jsons(row)).collect(), Vec::new()),
            Params::Psd(p) => (
                p.gammas.iter().flat_map(|row| jsons(row)).collect(),
                jsons(&p.diag_roots),
            ),
        };
        Self {
            kind: p.kind(),
            shape: p.shape().clone(),
            gammas,
            diag_roots,
        }
    }
}

impl ParamsJson {
    /// Decodes and validates the shapes and contraction bounds.
    pub fn to_params(&self, tol: &Tolerances) -> Result<Params> {
        self.shape.validate()?;
        let gammas = matrices(&self.gammas)?;
        let diag_roots = matrices(&self.diag_roots)?;
        if self.kind != ParamKind::Psd && !diag_roots.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameters carry no diagonal roots",
                self.kind
            )));
        }
        let shape = self.shape.clone();
        let params = match self.kind {
            ParamKind::Row | ParamKind::Column => {
                let orientation = if self.kind == ParamKind::Row {
                    Orientation::Row
                } else {
                    Orientation::Column
                };
                let p = RowColParams {
                    orientation,
                    gammas,
                    shape,
                };
                p.validate()?;
                Params::RowCol(p)
            }
            ParamKind::Matrix => {
                let (rows, cols) = (shape.row_dims.len(), shape.col_dims.len());
                if gammas.len() != rows * cols {
                    return Err(Error::DimensionMismatch(format!(
                        "{rows}x{cols} grid needs {} gammas, got {}",
                        rows * cols,
                        gammas.len()
                    )));
                }
                let grid = gammas.chunks(cols).map(<[_]>::to_vec).collect();
                let p = MatrixContractionParams {
                    gammas: grid,
                    shape,
                };
                p.validate()?;
                Params::Matrix(p)
            }
            ParamKind::Psd => {
                let n = shape.row_dims.len();
                if gammas.len() != n * (n - 1) / 2 {
                    return Err(Error::DimensionMismatch(format!(
                        "{n} blocks need {} gammas, got {}",
                        n * (n - 1) / 2,
                        gammas.len()
                    )));
                }
                let mut rest = gammas.into_iter();
                let grid = (0..n)
                    .map(|i| rest.by_ref().take(n - i - 1).collect())
                    .collect();
                let p = PositiveSCParams {
                    diag_roots,
                    gammas: grid,
                    shape,
                };
                p.validate(tol)?;
                Params::Psd(p)
            }
        };
        for g in gammas_of(&params) {
            crate::contraction::ensure_contraction(g, tol)?;
        }
        Ok(params)
    }
}

fn gammas_of(p: &Params) -> Vec<&ComplexMatrix> {
    match p {
        Params::RowCol(p) => p.gammas.iter().collect(),
        Params::Matrix(p) => p.gammas.iter().flatten().collect(),
        Params::Psd(p) => p.gammas.iter().flatten().collect(),
    }
}

/// Rank-one POVM as the vectors `vᵢ` with `E(i) = vᵢvᵢ*`, each a list of
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl PovmJson {
    pub fn to_povm(&self) -> Result<Povm> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                MatrixJson {
                    rows: v.len(),
                    cols: 1,
                    data: v.clone(),
                }
                .to_matrix()
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::from_vectors(self.dim, vectors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelJson {
    pub fn to_channel(&self) -> Result<KrausChannel> {
        KrausChannel::new(self.in_dim, self.out_dim, matrices(&self.kraus)?)
    }
}

impl From<&KrausChannel> for ChannelJson {
    fn from(ch: &KrausChannel) -> Self {
        Self {
            in_dim: ch.in_dim,
            out_dim: ch.out_dim,
            kraus: jsons(&ch.kraus),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreedomJson {
    pub u1: MatrixJson,
    pub u2: MatrixJson,
}

impl FreedomJson {
    pub fn to_freedom(&self) -> Result<Freedom> {
        Ok(Freedom {
            u1: self.u1.to_matrix()?,
            u2: self.u2.to_matrix()?,
        })
    }
}

impl From<&Freedom> for FreedomJson {
    fn from(f: &Freedom) -> Self {
        Self {
            u1: MatrixJson::from(&f.u1),
            u2: MatrixJson::from(&f.u2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationJson {
    pub unitary: MatrixJson,
    /// Half-open `[start, end)` coordinates of the input space.
    pub system_embedding: [usize; 2],
    pub ancilla_dim: usize,
    pub kraus_blocks: usize,
    pub absorbing_block: Option<usize>,
    pub freedom: FreedomJson,
}

impl From<&DilationResult> for DilationJson {
    fn from(r: &DilationResult) -> Self {
        Self {
            unitary: MatrixJson::from(&r.unitary),
            system_embedding: [r.system_embedding.start, r.system_embedding.end],
            ancilla_dim: r.ancilla_dim,
            kraus_blocks: r.kraus_blocks,
            absorbing_block: r.absorbing_block,
            freedom: FreedomJson::from(&r.freedom),
        }
    }
}

impl DilationJson {
    pub fn to_result(&self) -> Result<DilationResult> {
        let [start, end] = self.system_embedding;
        let unitary = self.unitary.to_matrix()?;
        if start > end || end > unitary.nrows() || !unitary.is_square() {
            return Err(Error::DimensionMismatch("embedding outside the unitary".into()));
        }
        Ok(DilationResult {
            unitary,
            system_embedding: start..end,
            ancilla_dim: self.ancilla_dim,
            freedom: self.freedom.to_freedom()?,
            kraus_blocks: self.kraus_blocks,
            absorbing_block: self.absorbing_block,
        })
    }
}
