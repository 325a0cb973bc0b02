//! Linear maps between matrix algebras, stored by their action on
//! column-stacked vectors.
//!
//! `vec(X)` stacks the columns of `X`, so `vec(A X B*) = (conj(B) ⊗ A) vec(X)`
//! and a map `Φ(X) = Σ Aᵢ X Bᵢ*` has action matrix `Σ conj(Bᵢ) ⊗ Aᵢ`.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c64, identity, kron, zeros, ComplexMatrix, ONE};

/// Absolute tolerance for the numerically computed flags.
const FLAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MapFlags {
    pub hermiticity_preserving: bool,
    /// Known to be positive, either by construction from `(Eᵢ, Eᵢ)` pairs or
    /// as a catalogued witness. Never decided numerically.
    pub positive_declared: bool,
    pub unital: bool,
    pub trace_preserving: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLinearMap {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `out_dim² × in_dim²`, acting on column-stacked inputs.
    pub action: ComplexMatrix,
    pub flags: MapFlags,
}

fn unvec(v: &ComplexMatrix, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

fn vec_of(x: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(x.len(), 1, x.as_slice())
}

fn unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = zeros(n, n);
    e[(i, j)] = ONE;
    e
}

impl MatrixLinearMap {
    /// Builds a map from its action matrix and computes the numerical flags.
    pub fn from_action(
        in_dim: usize,
        out_dim: usize,
        action: ComplexMatrix,
        positive_declared: bool,
    ) -> Result<Self> {
        if action.shape() != (out_dim * out_dim, in_dim * in_dim) {
            return Err(Error::DimensionMismatch(format!(
                "action for {in_dim} -> {out_dim} must be {}x{}, got {}x{}",
                out_dim * out_dim,
                in_dim * in_dim,
                action.nrows(),
                action.ncols()
            )));
        }
        let mut map = Self {
            in_dim,
            out_dim,
            action,
            flags: MapFlags {
                positive_declared,
                ..MapFlags::default()
            },
        };
        map.flags.hermiticity_preserving = map.check_hermiticity();
        map.flags.unital = map.unital_deviation() <= FLAG_TOL;
        map.flags.trace_preserving = map.trace_deviation() <= FLAG_TOL;
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_action(n, n, identity(n * n), true).expect("square action")
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::DimensionMismatch(format!(
                "map expects {0}x{0} input, got {1}x{2}",
                self.in_dim,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(unvec(&(&self.action * vec_of(x)), self.out_dim))
    }

    /// `‖Φ(I) − I‖` (Frobenius), infinite if the dimensions differ.
    pub fn unital_deviation(&self) -> f64 {
        if self.in_dim != self.out_dim {
            return f64::INFINITY;
        }
        let id = identity(self.in_dim);
        (self.apply(&id).expect("square input") - id).norm()
    }

    /// Largest `|Tr Φ(Eᵢⱼ) − δᵢⱼ|` over matrix units.
    pub fn trace_deviation(&self) -> f64 {
        let n = self.in_dim;
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                let col = self.action.column(j * n + i);
                let tr: num_complex::Complex64 =
                    (0..self.out_dim).map(|d| col[d * self.out_dim + d]).sum();
                let expected = if i == j { ONE } else { c64(0.0, 0.0) };
                worst = worst.max((tr - expected).norm());
            }
        }
        worst
    }

    fn check_hermiticity(&self) -> bool {
        let n = self.in_dim;
        let scale = self.action.norm().max(1.0);
        for i in 0..n {
            for j in i..n {
                let a = self.apply(&unit(n, i, j)).expect("square input");
                let b = self.apply(&unit(n, j, i)).expect("square input");
                if (a.adjoint() - b).norm() > FLAG_TOL * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `c · Φ`, with flags recomputed.
    pub fn scaled(&self, c: f64) -> Self {
        Self::from_action(
            self.in_dim,
            self.out_dim,
            &self.action * c64(c, 0.0),
            self.flags.positive_declared && c >= 0.0,
        )
        .expect("same shape")
    }
}

/// `Φ(X) = Σ Aᵢ X Bᵢ*`.
///
/// Declared positive when every pair has `Aᵢ = Bᵢ` (the map is then
/// completely positive).
pub fn map_from_kraus_pairs(
    pairs: &[(ComplexMatrix, ComplexMatrix)],
) -> Result<MatrixLinearMap> {
    let (a0, _) = pairs
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no Kraus pairs".into()))?;
    let (m, n) = a0.shape();
    let mut action = zeros(m * m, n * n);
    for (k, (a, b)) in pairs.iter().enumerate() {
        if a.shape() != (m, n) || b.shape() != (m, n) {
            return Err(Error::DimensionMismatch(format!(
                "pair {k} must be {m}x{n}, got {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        action += kron(&b.conjugate(), a);
    }
    let cp = pairs.iter().all(|(a, b)| a == b);
    MatrixLinearMap::from_action(n, m, action, cp)
}

/// Catalogued positive maps that are not completely positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinWitness {
    /// `X ↦ Xᵀ`.
    Transpose,
    /// `X ↦ Tr(X) I − X`.
    Reduction,
    /// Choi's map on `3 × 3` matrices: the diagonal is replaced by
    /// `(x₁₁ + x₃₃, x₁₁ + x₂₂, x₂₂ + x₃₃)` and off-diagonal entries are negated.
    Choi3,
}

impl BuiltinWitness {
    pub const ALL: [BuiltinWitness; 3] = [Self::Transpose, Self::Reduction, Self::Choi3];

    pub fn name(self) -> &'static str {
        match self {
            Self::Transpose => "transpose",
            Self::Reduction => "reduction",
            Self::Choi3 => "choi3",
        }
    }

    /// The only dimension the map is defined on, if it is fixed.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            Self::Choi3 => Some(3),
            _ => None,
        }
    }
}

impl FromStr for BuiltinWitness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// The witness `name` acting on `dim × dim` matrices.
pub fn builtin_witness(name: &str, dim: usize) -> Result<MatrixLinearMap> {
    let w: BuiltinWitness = name.parse()?;
    if dim == 0 {
        return Err(Error::DimensionMismatch("witness dimension must be positive".into()));
    }
    if let Some(fixed) = w.fixed_dim() {
        if dim != fixed {
            return Err(Error::UnsupportedCombination(format!(
                "{} is defined on {fixed}x{fixed} matrices only, not {dim}x{dim}",
                w.name()
            )));
        }
    }
    let n = dim;
    let mut action = zeros(n * n, n * n);
    match w {
        BuiltinWitness::Transpose => {
            for i in 0..n {
                for j in 0..n {
                    // vec index of (i, j) is j·n + i
                    action[(i * n + j, j * n + i)] = ONE;
                }
            }
        }
        BuiltinWitness::Reduction => {
            for i in 0..n {
                for d in 0..n {
                    action[(d * n + d, i * n + i)] += ONE;
                }
            }
            action -= identity(n * n);
        }
        BuiltinWitness::Choi3 => {
            action = -identity(9);
            // diagonal output d receives 2·x_dd + x_ee with e the cyclic successor
            // two steps on; together with −x_dd this gives the listed sums
            for (d, extra) in [(0, 2), (1, 0), (2, 1)] {
                action[(d * 3 + d, d * 3 + d)] += c64(2.0, 0.0);
                action[(d * 3 + d, extra * 3 + extra)] += ONE;
            }
        }
    }
    MatrixLinearMap::from_action(n, n, action, true)
}

/// `(I_k ⊗ Φ)(A)`: `Φ` applied to each of the `k × k` blocks of `A`.
pub fn apply_blockwise(phi: &MatrixLinearMap, a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let (n, m) = (phi.in_dim, phi.out_dim);
    if k == 0 || a.shape() != (k * n, k * n) {
        return Err(Error::DimensionMismatch(format!(
            "expected {k}x{k} blocks of size {n}, got a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = zeros(k * m, k * m);
    for i in 0..k {
        for j in 0..k {
            let block = a.view((i * n, j * n), (n, n)).into_owned();
            out.view_mut((i * m, j * m), (m, m))
                .copy_from(&phi.apply(&block)?);
        }
    }
    Ok(out)
}
