//! Finite-difference operators `A`, `B`, `R` on a box grid.
//!
//! Every operator is stored as a symmetric stiffness matrix `K` together with
//! the lumped trapezoid mass `M` (the quadrature weights), so that
//!
//! * `uᵀ K v` is the discrete bilinear form `⟨Au, v⟩`, and
//! * `M⁻¹ K u` is the strong-form stencil (`-Δ` with reflected ghost nodes on
//!   Neumann boundaries).
//!
//! The Neumann stiffness sums `(Δ_a u)(Δ_a v)/h_a²` over grid edges with the
//! trapezoid weight of the edge, which makes the discrete Green identity exact.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{BandLu, CsrMatrix};
use crate::schedule::Envelope;

/// Boundary conditions for the temperature. The order parameter always
/// satisfies `∂_n χ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    /// `θ = θ∞` on Γ, imposed as `u = j'(θ) = 0`.
    DirichletTheta,
    /// `-∂_n j'(θ) = η (j'(θ) - j'(θ_Γ))` with exterior temperature
    /// `θ_Γ(t) = θ∞ + amplitude · envelope(t)` on all of Γ.
    RobinTheta {
        eta: f64,
        amplitude: f64,
        envelope: Envelope,
    },
}

impl BoundarySpec {
    /// Robin exchange with an exterior held at `θ∞`.
    pub fn robin(eta: f64) -> Self {
        BoundarySpec::RobinTheta {
            eta,
            amplitude: 0.0,
            envelope: Envelope::Constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundarySpec::DirichletTheta => Ok(()),
            BoundarySpec::RobinTheta {
                eta,
                amplitude,
                envelope,
            } => {
                if !(*eta > 0.0) || !eta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "Robin coefficient eta must be positive, got {eta}"
                    )));
                }
                if *amplitude != 0.0 && !envelope.square_integrable() {
                    return Err(Error::InvalidParameter(
                        "boundary temperature offset must be square integrable in time".into(),
                    ));
                }
                envelope.validate()
            }
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundarySpec::DirichletTheta)
    }

    pub fn eta(&self) -> Option<f64> {
        match self {
            BoundarySpec::RobinTheta { eta, .. } => Some(*eta),
            _ => None,
        }
    }

    /// Exterior boundary temperature at time `t`, if Robin.
    pub fn theta_gamma(&self, theta_inf: f64, t: f64) -> Option<f64> {
        match self {
            BoundarySpec::RobinTheta {
                amplitude, envelope, ..
            } => Some(theta_inf + amplitude * envelope.value(t)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    /// `-Δ` with homogeneous Neumann conditions (annihilates constants).
    A,
    /// `-Δ` on the free nodes with `u = 0` on Γ; identity rows on Γ.
    BDirichlet,
    /// `-Δ` with Robin boundary mass `η ∫_Γ u v`.
    R,
}

/// Assembled operator. Immutable; the factorization used by
/// [`DiscreteOperator::dual_norm_sq`] is computed once on first use.
#[derive(Debug)]
pub struct DiscreteOperator {
    kind: OperatorKind,
    grid: Arc<Grid>,
    stiffness: CsrMatrix,
    weights: Vec<f64>,
    fixed: Vec<bool>,
    factor: OnceLock<std::result::Result<BandLu, Error>>,
}

impl Clone for DiscreteOperator {
    fn clone(&self) -> Self {
        DiscreteOperator {
            kind: self.kind,
            grid: Arc::clone(&self.grid),
            stiffness: self.stiffness.clone(),
            weights: self.weights.clone(),
            fixed: self.fixed.clone(),
            factor: OnceLock::new(),
        }
    }
}

/// Neumann stiffness of `-Δ` on the grid.
pub(crate) fn neumann_triplets(grid: &Grid) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    let d = grid.dim();
    for idx in 0..grid.len() {
        let m = grid.multi_index(idx);
        for axis in 0..d {
            if let (_, Some(p)) = grid.neighbours(idx, axis) {
                // Edge weight: 1/h_a times the trapezoid weights across the edge.
                let mut c = 1.0 / grid.spacing(axis);
                for other in (0..d).filter(|o| *o != axis) {
                    let h = grid.spacing(other);
                    let end = m[other] == 0 || m[other] == grid.nodes()[other] - 1;
                    c *= if end { 0.5 * h } else { h };
                }
                t.push((idx, idx, c));
                t.push((p, p, c));
                t.push((idx, p, -c));
                t.push((p, idx, -c));
            }
        }
    }
    t
}

impl DiscreteOperator {
    /// Assembles `kind` on `grid`; `bc` supplies `η` for [`OperatorKind::R`].
    pub fn assemble(grid: &Arc<Grid>, bc: &BoundarySpec, kind: OperatorKind) -> Result<Self> {
        let n = grid.len();
        let weights = grid.weights();
        let mut fixed = vec![false; n];
        let triplets = match kind {
            OperatorKind::A => neumann_triplets(grid),
            OperatorKind::R => {
                let eta = bc
                    .eta()
                    .ok_or_else(|| Error::InvalidParameter("operator R needs a Robin boundary spec".into()))?;
                let mut t = neumann_triplets(grid);
                for (i, b) in grid.boundary_weights().into_iter().enumerate() {
                    if b > 0.0 {
                        t.push((i, i, eta * b));
                    }
                }
                t
            }
            OperatorKind::BDirichlet => {
                for (i, f) in fixed.iter_mut().enumerate() {
                    *f = grid.is_boundary(i);
                }
                let mut t: Vec<_> = neumann_triplets(grid)
                    .into_iter()
                    .filter(|&(i, j, _)| !fixed[i] && !fixed[j])
                    .collect();
                for (i, w) in weights.iter().enumerate() {
                    if fixed[i] {
                        t.push((i, i, *w));
                    }
                }
                t
            }
        };
        Ok(DiscreteOperator {
            kind,
            grid: Arc::clone(grid),
            stiffness: CsrMatrix::from_triplets(n, triplets),
            weights,
            fixed,
            factor: OnceLock::new(),
        })
    }

    /// The Neumann operator `A`.
    pub fn a(grid: &Arc<Grid>) -> Self {
        Self::assemble(grid, &BoundarySpec::DirichletTheta, OperatorKind::A).expect("A needs no boundary data")
    }

    /// The heat operator `B` selected by the boundary conditions:
    /// Dirichlet picks `-Δ` on `H¹₀`, Robin picks `R`.
    pub fn b(grid: &Arc<Grid>, bc: &BoundarySpec) -> Result<Self> {
        let kind = if bc.is_dirichlet() {
            OperatorKind::BDirichlet
        } else {
            OperatorKind::R
        };
        Self::assemble(grid, bc, kind)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Lumped mass (trapezoid weights).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes carrying a Dirichlet constraint.
    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    /// Strong form `M⁻¹ K u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.stiffness.mul_vec(u);
        for (yi, w) in y.iter_mut().zip(&self.weights) {
            *yi /= w;
        }
        y
    }

    /// Bilinear form `uᵀ K v`.
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.stiffness.bilinear(u, v)
    }

    fn factorization(&self) -> Result<&BandLu> {
        self.factor
            .get_or_init(|| {
                if self.kind == OperatorKind::A {
                    return Err(Error::SingularSolve("A annihilates constants".into()));
                }
                self.stiffness
                    .to_band()
                    .factor()
                    .map_err(|e| Error::SingularSolve(e.to_string()))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Squared dual norm `ℓᵀ K⁻¹ ℓ` of a load vector `ℓ` (the discrete
    /// `⟨g, ·⟩`). Loads on Dirichlet nodes are ignored.
    pub fn dual_norm_sq_load(&self, load: &[f64]) -> Result<f64> {
        let lu = self.factorization()?;
        let mut l = load.to_vec();
        for (li, f) in l.iter_mut().zip(&self.fixed) {
            if *f {
                *li = 0.0;
            }
        }
        let z = lu.solve(&l);
        Ok(l.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0))
    }

    /// Squared dual norm of a nodal density `g` (load `M g`).
    pub fn dual_norm_sq(&self, g: &[f64]) -> Result<f64> {
        let load: Vec<f64> = g.iter().zip(&self.weights).map(|(a, w)| a * w).collect();
        self.dual_norm_sq_load(&load)
    }
}
