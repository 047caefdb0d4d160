use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{ModelSpec, Potential};

/// `(t, θ, χ)` with the caches `u = j'(θ)` and `e = θ + λ(χ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    t: f64,
    theta: Field,
    chi: Field,
    u: Vec<f64>,
    e: Vec<f64>,
}

impl State {
    /// Checks that every node of `θ` lies in `J` and every node of `χ` in `I`.
    pub fn new(t: f64, theta: Field, chi: Field, model: &ModelSpec) -> Result<Self> {
        if !Arc::ptr_eq(theta.grid(), chi.grid()) && theta.grid() != chi.grid() {
            return Err(Error::InvalidParameter("θ and χ live on different grids".into()));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        let u = theta
            .values()
            .iter()
            .map(|&r| model.j.dj(r))
            .collect::<Result<Vec<_>>>()?;
        for &r in chi.values() {
            let dom = model.w.domain();
            if !dom.contains(r) {
                return Err(Error::DomainViolation {
                    potential: model.w.name.clone(),
                    r,
                    lo: dom.lo,
                    hi: dom.hi,
                });
            }
        }
        let e = theta
            .values()
            .iter()
            .zip(chi.values())
            .map(|(th, c)| th + model.lambda.value(*c))
            .collect();
        Ok(State { t, theta, chi, u, e })
    }

    /// Constant fields `θ ≡ θ∞`, `χ ≡ chi`.
    pub fn uniform(grid: &Arc<Grid>, chi: f64, model: &ModelSpec) -> Result<Self> {
        State::new(
            0.0,
            Field::constant(Arc::clone(grid), model.theta_inf()),
            Field::constant(Arc::clone(grid), chi),
            model,
        )
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn theta(&self) -> &Field {
        &self.theta
    }

    pub fn chi(&self) -> &Field {
        &self.chi
    }

    /// `u = j'(θ)`.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Internal energy density `θ + λ(χ)`.
    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.theta.grid()
    }
}
