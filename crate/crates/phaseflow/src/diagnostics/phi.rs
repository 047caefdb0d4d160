use serde::Serialize;

use super::trace::EnergyTrace;

/// `Φ(t_k) = ∫j(θ) + ½∫_{t_k}^T ‖g‖²_{V*} + E(χ(t_k)) - E(χ∞)` per trace row.
///
/// The source tail is truncated at the horizon `T`, so these values are
/// lower bounds for the untruncated functional.
pub fn phi_series(trace: &EnergyTrace, e_inf: f64) -> Vec<f64> {
    let rows = &trace.rows;
    let mut tail = vec![0.0; rows.len()];
    for k in (0..rows.len().saturating_sub(1)).rev() {
        tail[k] = tail[k + 1] + rows[k + 1].source_work;
    }
    rows.iter()
        .zip(&tail)
        .map(|(r, g)| r.energy_theta + 0.5 * g + r.energy_chi - e_inf)
        .collect()
}

/// Indices `k` with `Φ(k) - Φ(k-1) > tol`.
pub fn phi_increases(phi: &[f64], tol: f64) -> Vec<usize> {
    (1..phi.len()).filter(|&k| phi[k] - phi[k - 1] > tol).collect()
}

/// Numerical check of `sup_t t^{1+δ} ∫_t^∞ ‖g‖²_{V*} < ∞` on the simulated
/// horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub delta: f64,
    /// `max_k t_k^{1+δ} Σ_{j>k} Δt_j ‖g(t_j)‖²`.
    pub sup: f64,
    pub finite: bool,
    /// Whether the weighted tail is not increasing over the final quarter
    /// of the horizon (a bounded trend rather than just a finite horizon).
    pub settled: bool,
    /// Analytic verdict from the source envelope, when known.
    pub envelope_condition: Option<bool>,
}

pub fn tail_test(trace: &EnergyTrace, delta: f64, envelope_condition: Option<bool>) -> TailReport {
    let rows = &trace.rows;
    let n = rows.len();
    let mut tail = 0.0;
    let mut weighted = vec![0.0; n];
    for k in (0..n).rev() {
        weighted[k] = rows[k].t.max(0.0).powf(1.0 + delta) * tail;
        tail += rows[k].source_work;
    }
    let sup = weighted.iter().cloned().fold(0.0, f64::max);
    let q = (3 * n) / 4;
    let settled = n < 4 || weighted[q..].iter().all(|v| *v <= weighted[q] * (1.0 + 1e-12) + 1e-300);
    TailReport {
        delta,
        sup,
        finite: sup.is_finite(),
        settled,
        envelope_condition,
    }
}
