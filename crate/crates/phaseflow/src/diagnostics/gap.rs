use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::norms::h_norm;

/// Running sup of `‖θ_A - θ_B‖_H + ‖χ_A - χ_B‖_H` over the fields stored by
/// both trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityGap {
    pub times: Vec<f64>,
    pub gaps: Vec<f64>,
}

impl StabilityGap {
    /// Gap at the last stored time not after `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let k = self.times.iter().rposition(|s| *s <= t + 1e-12)?;
        Some(self.gaps[k])
    }
}

pub fn stability_gap(a: &Trajectory, b: &Trajectory) -> Result<StabilityGap> {
    if a.grid != b.grid {
        return Err(Error::ConfigMismatch("trajectories use different grids".into()));
    }
    if a.config.dt != b.config.dt {
        return Err(Error::ConfigMismatch(format!(
            "time steps differ ({} vs {})",
            a.config.dt, b.config.dt
        )));
    }
    if a.config.t_end != b.config.t_end {
        return Err(Error::ConfigMismatch(format!(
            "horizons differ ({} vs {})",
            a.config.t_end, b.config.t_end
        )));
    }
    let w = a.grid.weights();
    let mut times = Vec::new();
    let mut gaps = Vec::new();
    let mut sup = 0.0f64;
    let mut j = 0;
    for fa in &a.fields {
        while j < b.fields.len() && b.fields[j].step < fa.step {
            j += 1;
        }
        let Some(fb) = b.fields.get(j).filter(|f| f.step == fa.step) else {
            continue;
        };
        let dt: Vec<f64> = fa.theta.iter().zip(&fb.theta).map(|(x, y)| x - y).collect();
        let dc: Vec<f64> = fa.chi.iter().zip(&fb.chi).map(|(x, y)| x - y).collect();
        sup = sup.max(h_norm(&w, &dt) + h_norm(&w, &dc));
        times.push(fa.t);
        gaps.push(sup);
    }
    Ok(StabilityGap { times, gaps })
}
