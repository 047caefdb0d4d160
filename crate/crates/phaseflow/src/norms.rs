//! Discrete norms: `H = L²`, `V = H¹`, the Robin energy norm, the dual norm
//! `V*` and the sup norm.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{BandLu, CsrMatrix};
use crate::operators::{neumann_triplets, BoundarySpec, DiscreteOperator, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    H,
    V,
    R,
    Vstar,
    C0,
}

/// `√Σ w_i f_i²`.
pub fn h_norm(weights: &[f64], f: &[f64]) -> f64 {
    weights.iter().zip(f).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
}

pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Nodal gradient along `axis`: central differences inside, second-order
/// one-sided differences on the boundary.
pub fn gradient(grid: &Grid, f: &[f64], axis: usize) -> Vec<f64> {
    let h = grid.spacing(axis);
    let s = grid.stride(axis);
    let n = grid.nodes()[axis];
    (0..grid.len())
        .map(|idx| {
            let m = grid.multi_index(idx)[axis];
            if m == 0 {
                (-3.0 * f[idx] + 4.0 * f[idx + s] - f[idx + 2 * s]) / (2.0 * h)
            } else if m == n - 1 {
                (3.0 * f[idx] - 4.0 * f[idx - s] + f[idx - 2 * s]) / (2.0 * h)
            } else {
                (f[idx + s] - f[idx - s]) / (2.0 * h)
            }
        })
        .collect()
}

/// `√(∫ f² + ∫ |∇f|²)`.
pub fn v_norm(grid: &Grid, f: &[f64]) -> f64 {
    let w = grid.weights();
    let mut total: f64 = w.iter().zip(f).map(|(w, v)| w * v * v).sum();
    for axis in 0..grid.dim() {
        let g = gradient(grid, f, axis);
        total += w.iter().zip(&g).map(|(w, v)| w * v * v).sum::<f64>();
    }
    total.sqrt()
}

/// Elliptic pivot `P` defining the discrete dual norm
/// `‖f‖²_{V*} = (Mf)ᵀ P⁻¹ (Mf)`.
///
/// Robin problems use `P = -Δ_Neumann + I` (dual of `H¹`), Dirichlet problems
/// use `P = -Δ_Dirichlet` (dual of `H¹₀`, boundary loads dropped).
#[derive(Debug, Clone)]
pub struct DualPivot {
    weights: Vec<f64>,
    fixed: Vec<bool>,
    lu: BandLu,
}

impl DualPivot {
    pub fn neumann(grid: &Arc<Grid>) -> Result<Self> {
        let weights = grid.weights();
        let mut t = neumann_triplets(grid);
        t.extend(weights.iter().enumerate().map(|(i, w)| (i, i, *w)));
        let k = CsrMatrix::from_triplets(grid.len(), t);
        let lu = k.to_band().factor().map_err(|e| Error::SingularSolve(e.to_string()))?;
        Ok(DualPivot {
            weights,
            fixed: vec![false; grid.len()],
            lu,
        })
    }

    pub fn dirichlet(grid: &Arc<Grid>) -> Result<Self> {
        let op = DiscreteOperator::assemble(grid, &BoundarySpec::DirichletTheta, OperatorKind::BDirichlet)?;
        let lu = op
            .stiffness()
            .to_band()
            .factor()
            .map_err(|e| Error::SingularSolve(e.to_string()))?;
        Ok(DualPivot {
            weights: op.weights().to_vec(),
            fixed: op.fixed().to_vec(),
            lu,
        })
    }

    pub fn for_bc(grid: &Arc<Grid>, bc: &BoundarySpec) -> Result<Self> {
        if bc.is_dirichlet() {
            Self::dirichlet(grid)
        } else {
            Self::neumann(grid)
        }
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        let load: Vec<f64> = f
            .iter()
            .zip(&self.weights)
            .zip(&self.fixed)
            .map(|((v, w), fx)| if *fx { 0.0 } else { v * w })
            .collect();
        let z = self.lu.solve(&load);
        load.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }
}

/// Computes the requested norm of the nodal values `f`.
pub fn norm(grid: &Arc<Grid>, f: &[f64], which: NormKind, bc: &BoundarySpec) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "field has {} values, grid has {} nodes",
            f.len(),
            grid.len()
        )));
    }
    Ok(match which {
        NormKind::H => h_norm(&grid.weights(), f),
        NormKind::V => v_norm(grid, f),
        NormKind::C0 => sup_norm(f),
        NormKind::R => {
            let r = DiscreteOperator::assemble(grid, bc, OperatorKind::R)?;
            r.form(f, f).max(0.0).sqrt()
        }
        NormKind::Vstar => DualPivot::for_bc(grid, bc)?.norm(f),
    })
}
