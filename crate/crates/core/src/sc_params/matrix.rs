//! Contractions with an `n × m` block structure.
//!
//! Block column `k` is `Fₖ Cₖ` where `Cₖ` is a column contraction and
//! `Fₖ = L₁ ⋯ Lₖ₋₁` with `Lᵢ` the lower triangular factor of `D_{Cᵢ*}²`
//! given by the column parameters of `Cᵢ`. The parameter grid stores the
//! column parameters of every `Cₖ`, indexed by (block row, block column).

use super::rowcol::{col_defect_factors, col_parametrize, col_reconstruct, DefectFactors};
use super::{expect_shape, BlockShape, Orientation, RowColParams};
use crate::contraction::{defects, ensure_contraction, solve_left_contraction_factor};
use crate::error::{Error, Result};
use crate::linalg::{hstack, identity, zeros, ComplexMatrix, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixContractionParams {
    /// `gammas[i][j]` sits at block row `i`, block column `j`.
    pub gammas: Vec<Vec<ComplexMatrix>>,
    pub shape: BlockShape,
}

impl MatrixContractionParams {
    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        let (n, m) = (self.shape.row_dims.len(), self.shape.col_dims.len());
        if self.gammas.len() != n || self.gammas.iter().any(|row| row.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "parameter grid must be {n}x{m}"
            )));
        }
        for (i, row) in self.gammas.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                expect_shape(
                    g,
                    self.shape.row_dims[i],
                    self.shape.col_dims[j],
                    &format!("gamma ({i}, {j})"),
                )?;
            }
        }
        Ok(())
    }

    /// Column parameters of the `j`-th column contraction `Cⱼ`.
    pub fn column(&self, j: usize) -> RowColParams {
        RowColParams {
            orientation: Orientation::Column,
            gammas: self.gammas.iter().map(|row| row[j].clone()).collect(),
            shape: BlockShape {
                row_dims: self.shape.row_dims.clone(),
                col_dims: vec![self.shape.col_dims[j]],
            },
        }
    }

    /// The four parameters of a 2×2 block shape in closed-form order:
    /// `(0,0)`, `(0,1)`, `(1,0)`, `(1,1)`.
    pub fn corners(&self) -> Result<[&ComplexMatrix; 4]> {
        if self.shape.row_dims.len() != 2 || self.shape.col_dims.len() != 2 {
            return Err(Error::ShapeUnsupported(format!(
                "expected 2x2 blocks, got {}x{}",
                self.shape.row_dims.len(),
                self.shape.col_dims.len()
            )));
        }
        Ok([
            &self.gammas[0][0],
            &self.gammas[0][1],
            &self.gammas[1][0],
            &self.gammas[1][1],
        ])
    }
}

pub fn matrix_parametrize(
    t: &ComplexMatrix,
    shape: &BlockShape,
    tol: &Tolerances,
) -> Result<MatrixContractionParams> {
    shape.check(t)?;
    ensure_contraction(t, tol)?;
    let (n, m) = (shape.row_dims.len(), shape.col_dims.len());
    let mut gammas = vec![Vec::with_capacity(m); n];
    let mut f = identity(shape.total_rows());
    for j in 0..m {
        let s = t.columns(shape.col_offset(j), shape.col_dims[j]).into_owned();
        let c = if j == 0 {
            s
        } else {
            solve_left_contraction_factor(&f, &s, tol)?
        };
        let col_shape = BlockShape::column(shape.row_dims.clone(), shape.col_dims[j])?;
        let params = col_parametrize(&c, &col_shape, tol)?;
        f *= col_defect_factors(&params, tol)?.d_t_star;
        for (row, g) in gammas.iter_mut().zip(params.gammas) {
            row.push(g);
        }
    }
    Ok(MatrixContractionParams {
        gammas,
        shape: shape.clone(),
    })
}

pub fn matrix_reconstruct(params: &MatrixContractionParams, tol: &Tolerances) -> Result<ComplexMatrix> {
    params.validate()?;
    let mut f = identity(params.shape.total_rows());
    let mut blocks = Vec::with_capacity(params.shape.col_dims.len());
    for j in 0..params.shape.col_dims.len() {
        let col = params.column(j);
        blocks.push(&f * col_reconstruct(&col, tol)?);
        f *= col_defect_factors(&col, tol)?.d_t_star;
    }
    hstack(&blocks)
}

/// `[[Γ₁, D_{Γ₁*}Γ₂], [Γ₃D_{Γ₁}, −Γ₃Γ₁*Γ₂ + D_{Γ₃*}Γ₄D_{Γ₂}]]`.
pub fn closed_form_2x2(
    g1: &ComplexMatrix,
    g2: &ComplexMatrix,
    g3: &ComplexMatrix,
    g4: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let (d1, d2, d3) = (defects(g1, tol)?, defects(g2, tol)?, defects(g3, tol)?);
    defects(g4, tol)?;
    let shape = BlockShape::new(
        vec![g1.nrows(), g3.nrows()],
        vec![g1.ncols(), g2.ncols()],
    )?;
    expect_shape(g2, g1.nrows(), g2.ncols(), "gamma (0, 1)")?;
    expect_shape(g3, g3.nrows(), g1.ncols(), "gamma (1, 0)")?;
    expect_shape(g4, g3.nrows(), g2.ncols(), "gamma (1, 1)")?;
    let mut t = zeros(shape.total_rows(), shape.total_cols());
    shape.set_block(&mut t, 0, 0, g1);
    shape.set_block(&mut t, 0, 1, &(&d1.d_t_star * g2));
    shape.set_block(&mut t, 1, 0, &(g3 * &d1.d_t));
    let corner = -(g3 * g1.adjoint() * g2) + &d3.d_t_star * g4 * &d2.d_t;
    shape.set_block(&mut t, 1, 1, &corner);
    Ok(t)
}

/// `Λ` with `ΛΛ* = I − T*T` for the closed form of `T`:
/// `[[D_{Γ₁}D_{Γ₃}, 0], [−Γ₂*Γ₁D_{Γ₃} − D_{Γ₂}Γ₄*Γ₃, D_{Γ₂}D_{Γ₄}]]`.
fn lower_2x2(
    g1: &ComplexMatrix,
    g2: &ComplexMatrix,
    g3: &ComplexMatrix,
    g4: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let d1 = defects(g1, tol)?.d_t;
    let d2 = defects(g2, tol)?.d_t;
    let d3 = defects(g3, tol)?.d_t;
    let d4 = defects(g4, tol)?.d_t;
    let shape = BlockShape::square(vec![g1.ncols(), g2.ncols()])?;
    let mut l = zeros(shape.total_rows(), shape.total_cols());
    shape.set_block(&mut l, 0, 0, &(&d1 * &d3));
    let below = -(g2.adjoint() * g1 * &d3) - &d2 * g4.adjoint() * g3;
    shape.set_block(&mut l, 1, 0, &below);
    shape.set_block(&mut l, 1, 1, &(&d2 * &d4));
    Ok(l)
}

/// Lower triangular factors of both defect squares of a 2×2 block
/// contraction, written directly in its four parameters.
///
/// The factor for `I − TT*` is the same formula applied to `T*`, whose
/// parameters are `(Γ₁*, Γ₃*, Γ₂*, Γ₄*)`.
pub fn matrix_defects_2x2(
    params: &MatrixContractionParams,
    tol: &Tolerances,
) -> Result<DefectFactors> {
    params.validate()?;
    let [g1, g2, g3, g4] = params.corners()?;
    Ok(DefectFactors {
        d_t: lower_2x2(g1, g2, g3, g4, tol)?,
        d_t_star: lower_2x2(
            &g1.adjoint(),
            &g3.adjoint(),
            &g2.adjoint(),
            &g4.adjoint(),
            tol,
        )?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows, op_norm};
    use crate::sample::{random_contraction, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn scalar(x: f64) -> ComplexMatrix {
        from_real_rows(1, 1, &[x])
    }

    fn grid(gs: [ComplexMatrix; 4], shape: BlockShape) -> MatrixContractionParams {
        let [a, b, c, d] = gs;
        MatrixContractionParams {
            gammas: vec![vec![a, b], vec![c, d]],
            shape,
        }
    }

    #[test]
    fn zero_contraction_has_zero_parameters() {
        let shape = BlockShape::square(vec![1, 1]).unwrap();
        let p = matrix_parametrize(&zeros(2, 2), &shape, &tol()).unwrap();
        assert!(p.gammas.iter().flatten().all(|g| g.norm() == 0.0));
        assert_eq!(matrix_reconstruct(&p, &tol()).unwrap(), zeros(2, 2));
    }

    #[test]
    fn unitary_scalar_parameters_force_corner_entry() {
        let shape = BlockShape::square(vec![1, 1]).unwrap();
        for g4 in [0.0, 0.3, -1.0] {
            let p = grid([scalar(0.6), scalar(1.0), scalar(1.0), scalar(g4)], shape.clone());
            let t = matrix_reconstruct(&p, &tol()).unwrap();
            assert!((t[(1, 1)] - c64(-0.6, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn reconstruction_matches_closed_form() {
        let mut rng = rng_from_seed(50);
        let shape = BlockShape::new(vec![2, 1], vec![1, 3]).unwrap();
        for _ in 0..50 {
            let gs = [
                random_contraction(&mut rng, 2, 1, 0.9),
                random_contraction(&mut rng, 2, 3, 0.9),
                random_contraction(&mut rng, 1, 1, 0.9),
                random_contraction(&mut rng, 1, 3, 0.9),
            ];
            let closed = closed_form_2x2(&gs[0], &gs[1], &gs[2], &gs[3], &tol()).unwrap();
            let t = matrix_reconstruct(&grid(gs, shape.clone()), &tol()).unwrap();
            assert!((t - closed).norm() <= 1e-9);
        }
    }

    #[test]
    fn random_three_by_two_round_trip() {
        let mut rng = rng_from_seed(51);
        let shape = BlockShape::new(vec![2, 2, 2], vec![2, 2]).unwrap();
        for _ in 0..20 {
            let t = random_contraction(&mut rng, 6, 4, 0.95);
            let p = matrix_parametrize(&t, &shape, &tol()).unwrap();
            assert!((matrix_reconstruct(&p, &tol()).unwrap() - &t).norm() <= 1e-8);
            for g in p.gammas.iter().flatten() {
                assert!(op_norm(g) <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn reconstruction_of_random_parameters_is_contractive() {
        let mut rng = rng_from_seed(52);
        let shape = BlockShape::new(vec![1, 2, 1], vec![2, 1, 1]).unwrap();
        let gammas = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| random_contraction(&mut rng, shape.row_dims[i], shape.col_dims[j], 1.0))
                    .collect()
            })
            .collect();
        let p = MatrixContractionParams { gammas, shape };
        let t = matrix_reconstruct(&p, &tol()).unwrap();
        assert!(op_norm(&t) <= 1.0 + 1e-12);
    }

    #[test]
    fn defect_factors_of_zero_and_decoupled_parameters() {
        let shape = BlockShape::square(vec![1, 2]).unwrap();
        let zero = grid([zeros(1, 1), zeros(1, 2), zeros(2, 1), zeros(2, 2)], shape.clone());
        let f = matrix_defects_2x2(&zero, &tol()).unwrap();
        assert_eq!(f.d_t, identity(3));
        assert_eq!(f.d_t_star, identity(3));

        let mut rng = rng_from_seed(53);
        let g1 = random_contraction(&mut rng, 1, 1, 0.5);
        let g4 = random_contraction(&mut rng, 2, 2, 0.5);
        let p = grid([g1.clone(), zeros(1, 2), zeros(2, 1), g4.clone()], shape);
        let f = matrix_defects_2x2(&p, &tol()).unwrap();
        let expected = crate::linalg::direct_sum(
            &defects(&g1, &tol()).unwrap().d_t,
            &defects(&g4, &tol()).unwrap().d_t,
        );
        assert!((f.d_t - expected).norm() < 1e-14);
    }

    #[test]
    fn defect_factors_reproduce_defect_squares() {
        let mut rng = rng_from_seed(54);
        for (rows, cols) in [(vec![1, 1], vec![1, 1]), (vec![2, 1], vec![1, 3]), (vec![2, 2], vec![2, 2])] {
            let shape = BlockShape::new(rows, cols).unwrap();
            for _ in 0..30 {
                let t = random_contraction(&mut rng, shape.total_rows(), shape.total_cols(), 0.97);
                let p = matrix_parametrize(&t, &shape, &tol()).unwrap();
                let f = matrix_defects_2x2(&p, &tol()).unwrap();
                let dt = identity(t.ncols()) - t.adjoint() * &t;
                let dts = identity(t.nrows()) - &t * t.adjoint();
                assert!((&f.d_t * f.d_t.adjoint() - dt).norm() <= 1e-9);
                assert!((&f.d_t_star * f.d_t_star.adjoint() - dts).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn defect_factors_need_two_by_two() {
        let shape = BlockShape::new(vec![1, 1, 1], vec![1]).unwrap();
        let p = matrix_parametrize(&zeros(3, 1), &shape, &tol()).unwrap();
        assert!(matches!(
            matrix_defects_2x2(&p, &tol()),
            Err(Error::ShapeUnsupported(_))
        ));
    }
}
