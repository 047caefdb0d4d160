use serde::Serialize;

use crate::dynamics::State;
use crate::error::Result;
use crate::grid::Field;
use crate::model::ModelSpec;
use crate::steady::residual_stationary;

use super::trace::{EnergyTrace, TraceRow};

/// Thresholds for declaring convergence to a stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaThresholds {
    /// Bound on `‖χ_t‖_H`.
    pub chit: f64,
    /// Bound on the stationary residual.
    pub residual: f64,
    /// Bound on `‖θ - θ∞‖_H`.
    pub theta: f64,
    /// Consecutive trace rows that must all pass.
    pub consecutive: usize,
}

impl Default for OmegaThresholds {
    fn default() -> Self {
        OmegaThresholds {
            chit: 1e-7,
            residual: 1e-6,
            theta: 1e-6,
            consecutive: 3,
        }
    }
}

impl OmegaThresholds {
    pub fn row_passes(&self, row: &TraceRow) -> bool {
        row.norm_chit_h < self.chit && row.stationary_residual < self.residual && row.dist_theta_h < self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Converged,
    Pending,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaVerdict {
    pub verdict: Verdict,
    /// Time of the last trace row examined.
    pub t: f64,
    /// Temperature of the limit candidate (`θ∞`).
    pub limit_theta: f64,
    /// `χ(t_final)`, the order-parameter part of the limit candidate.
    #[serde(skip)]
    pub limit_chi: Option<Field>,
    /// Stationary residual of `limit_chi`, recomputed from the field.
    pub certified_residual: f64,
    pub thresholds: OmegaThresholds,
}

/// CONVERGED when the last `consecutive` rows (or all rows, if fewer) meet
/// every threshold; PENDING otherwise.
pub fn detect_omega_limit(
    trace: &EnergyTrace,
    state: &State,
    thresholds: &OmegaThresholds,
    model: &ModelSpec,
) -> Result<OmegaVerdict> {
    let k = thresholds.consecutive.max(1).min(trace.len());
    let converged = k > 0 && trace.rows[trace.len() - k..].iter().all(|r| thresholds.row_passes(r));
    Ok(OmegaVerdict {
        verdict: if converged {
            Verdict::Converged
        } else {
            Verdict::Pending
        },
        t: trace.last().map_or(state.t(), |r| r.t),
        limit_theta: model.theta_inf(),
        certified_residual: residual_stationary(state.chi(), model)?,
        limit_chi: converged.then(|| state.chi().clone()),
        thresholds: *thresholds,
    })
}
