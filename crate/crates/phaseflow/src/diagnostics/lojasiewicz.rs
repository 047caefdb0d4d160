use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::ModelSpec;
use crate::norms::{sup_norm, v_norm};
use crate::steady::StationaryOperator;

use super::rate::linear_fit;

/// Minimum number of admitted samples.
pub const MIN_LOJ_SAMPLES: usize = 10;
/// Samples with `|E - E∞|` at or below this are dropped.
pub const ENERGY_FLOOR: f64 = 1e-13;

/// One point of the curve `(|E(χ) - E(χ∞)|, ‖Aχ + W'(χ)‖_{V*})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LojSample {
    pub t: f64,
    pub energy_gap: f64,
    pub residual: f64,
    /// `‖χ - χ∞‖_{V∩C⁰}`, taken as the larger of the two norms.
    pub dist: f64,
}

/// Fitted Łojasiewicz pair: `|E - E∞|^{1-ζ} ≤ c_ℓ ‖Aχ + W'(χ)‖_{V*}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LojFit {
    /// `1 - slope`, clamped to `(0, 1/2]`.
    pub zeta: f64,
    /// Smallest constant making the inequality hold on the admitted samples.
    pub c_l: f64,
    pub eps_loj: f64,
    pub admitted: usize,
    /// Raw slope of `log residual` against `log |E - E∞|`.
    pub slope: f64,
    pub intercept: f64,
    pub fit_residual: f64,
}

/// Regresses `log residual` on `log |E - E∞|` over the samples with
/// `dist ≤ eps_loj` and `|E - E∞| > 1e-13`.
pub fn estimate_from_samples(samples: &[LojSample], eps_loj: f64) -> Result<LojFit> {
    let admitted: Vec<&LojSample> = samples
        .iter()
        .filter(|s| s.dist <= eps_loj && s.energy_gap > ENERGY_FLOOR && s.residual > 0.0)
        .collect();
    if admitted.len() < MIN_LOJ_SAMPLES {
        return Err(Error::InsufficientSamples {
            admitted: admitted.len(),
            required: MIN_LOJ_SAMPLES,
        });
    }
    let x: Vec<f64> = admitted.iter().map(|s| s.energy_gap.ln()).collect();
    let y: Vec<f64> = admitted.iter().map(|s| s.residual.ln()).collect();
    let (intercept, slope, fit_residual) = linear_fit(&x, &y);
    let zeta = (1.0 - slope).clamp(1e-6, 0.5);
    let c_l = admitted
        .iter()
        .map(|s| s.energy_gap.powf(1.0 - zeta) / s.residual)
        .fold(0.0, f64::max);
    Ok(LojFit {
        zeta,
        c_l,
        eps_loj,
        admitted: admitted.len(),
        slope,
        intercept,
        fit_residual,
    })
}

/// Samples along the stored fields of a trajectory, relative to `χ∞`.
pub fn trajectory_samples(traj: &Trajectory, chi_inf: &Field, model: &ModelSpec) -> Result<Vec<LojSample>> {
    if **chi_inf.grid() != *traj.grid {
        return Err(Error::ConfigMismatch(
            "reference state lives on a different grid".into(),
        ));
    }
    let series: Vec<(f64, &[f64])> = traj.fields.iter().map(|s| (s.t, s.chi.as_slice())).collect();
    field_samples(&series, chi_inf, model)
}

/// Samples for `(t, χ(t))` pairs on the grid of `chi_inf`.
pub fn field_samples(series: &[(f64, &[f64])], chi_inf: &Field, model: &ModelSpec) -> Result<Vec<LojSample>> {
    let grid = chi_inf.grid();
    let op = StationaryOperator::new(grid)?;
    let e_inf = op.energy(&model.w, chi_inf.values())?;
    series
        .iter()
        .map(|&(t, chi)| {
            if chi.len() != grid.len() {
                return Err(Error::ConfigMismatch(
                    "reference state lives on a different grid".into(),
                ));
            }
            let diff: Vec<f64> = chi.iter().zip(chi_inf.values()).map(|(a, b)| a - b).collect();
            Ok(LojSample {
                t,
                energy_gap: (op.energy(&model.w, chi)? - e_inf).abs(),
                residual: op.residual(&model.w, chi)?,
                dist: v_norm(grid, &diff).max(sup_norm(&diff)),
            })
        })
        .collect()
}

/// Estimates `(ζ, c_ℓ)` near `χ∞` along a trajectory.
pub fn estimate_lojasiewicz(traj: &Trajectory, chi_inf: &Field, model: &ModelSpec, eps_loj: f64) -> Result<LojFit> {
    estimate_from_samples(&trajectory_samples(traj, chi_inf, model)?, eps_loj)
}

/// The scalar gradient flow `v' = -E'(v)` for `E(v) = a|v|^p`, whose
/// Łojasiewicz exponent at 0 is `ζ = 1/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGradientFlow {
    pub a: f64,
    pub p: f64,
}

impl ScalarGradientFlow {
    /// `E = v²/2`, `v' = -v`.
    pub fn quadratic() -> Self {
        ScalarGradientFlow { a: 0.5, p: 2.0 }
    }

    /// `E = v⁴`, `v' = -4v³`.
    pub fn quartic() -> Self {
        ScalarGradientFlow { a: 1.0, p: 4.0 }
    }

    pub fn energy(&self, v: f64) -> f64 {
        self.a * v.abs().powf(self.p)
    }

    pub fn gradient(&self, v: f64) -> f64 {
        self.a * self.p * v.abs().powf(self.p - 1.0) * v.signum()
    }

    /// Classical RK4 with `steps` uniform steps on `[0, t_end]`; returns
    /// `(t_k, v_k)` including the initial point.
    pub fn integrate(&self, v0: f64, t_end: f64, steps: usize) -> Vec<(f64, f64)> {
        let h = t_end / steps as f64;
        let f = |v: f64| -self.gradient(v);
        let mut v = v0;
        let mut out = Vec::with_capacity(steps + 1);
        out.push((0.0, v));
        for k in 1..=steps {
            let k1 = f(v);
            let k2 = f(v + 0.5 * h * k1);
            let k3 = f(v + 0.5 * h * k2);
            let k4 = f(v + h * k3);
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            out.push((k as f64 * h, v));
        }
        out
    }

    /// Łojasiewicz samples of a computed path (`E∞ = 0`, residual `|E'|`,
    /// distance `|v|`).
    pub fn samples(&self, path: &[(f64, f64)]) -> Vec<LojSample> {
        path.iter()
            .map(|&(t, v)| LojSample {
                t,
                energy_gap: self.energy(v),
                residual: self.gradient(v).abs(),
                dist: v.abs(),
            })
            .collect()
    }
}
