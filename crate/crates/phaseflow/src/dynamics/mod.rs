//! Time integration of
//!
//! ```text
//! θ_t + λ(χ)_t + B j'(θ) = g
//! χ_t + Aχ + W'(χ)      = λ'(χ) j'(θ)
//! ```
//!
//! by implicit Euler with a convex split of `W` and the exact secant of `λ`
//! (see [`scheme`]), one coupled Newton solve per step.

mod oracle;
pub mod scheme;
mod source;
mod state;
mod trajectory;

use std::sync::Arc;

pub use oracle::{oracle_step, ORACLE_MAX_NODES};
pub use scheme::{Problem, StepReport};
pub use source::{SourceSpec, SourceTags, SpaceProfile};
pub use state::State;
pub use trajectory::{run, StoredFields, Trajectory, TrajectoryConfig};

use crate::error::Result;
use crate::grid::Grid;
use crate::model::ModelSpec;
use crate::operators::BoundarySpec;

/// `ℰ(θ, χ) = ∫ ½|∇χ|² + W(χ) + j(θ)` by trapezoid quadrature, the gradient
/// term through the discrete Dirichlet form.
pub fn discrete_energy(state: &State, model: &ModelSpec, grid: &Arc<Grid>) -> Result<f64> {
    let p = Problem::new(
        model.clone(),
        Arc::clone(grid),
        BoundarySpec::DirichletTheta,
        SourceSpec::zero(),
    )?;
    p.energy(state)
}
