//! Volumetric heat sources `f(x, t)` and the right-hand side `g` they induce.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::ModelSpec;
use crate::operators::BoundarySpec;
use crate::schedule::Envelope;

/// Spatial factor of a separable source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceProfile {
    /// `Π_a sin(π x_a / L_a)`.
    Sine,
    /// `Π_a cos(π x_a / L_a)`.
    Cosine,
    Constant,
}

impl SpaceProfile {
    pub fn value(&self, grid: &Grid, x: [f64; 2]) -> f64 {
        let ext = grid.extents();
        match self {
            SpaceProfile::Constant => 1.0,
            SpaceProfile::Sine => (0..grid.dim()).map(|a| (PI * x[a] / ext[a]).sin()).product(),
            SpaceProfile::Cosine => (0..grid.dim()).map(|a| (PI * x[a] / ext[a]).cos()).product(),
        }
    }
}

/// Declared integrability of the source, used by the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct SourceTags {
    /// Exponent `p ∈ [1, ∞]` of the windowed bound on `g_t`.
    pub p: Option<f64>,
    /// Exponent `q ∈ [1, 2]` with `g_t ∈ L^q(0, ∞; V*)`.
    pub q: Option<f64>,
    /// Tail exponent `δ > 0` with `sup_t t^{1+δ} ∫_t^∞ ‖g‖²_{V*} < ∞`.
    pub delta: Option<f64>,
}

/// `f(x, t) = amplitude · profile(x) · envelope(t)`, or no source at all.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSpec {
    pub profile: Option<SpaceProfile>,
    pub amplitude: f64,
    pub envelope: Envelope,
    pub tags: SourceTags,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::zero()
    }
}

impl SourceSpec {
    pub fn zero() -> Self {
        SourceSpec {
            profile: None,
            amplitude: 0.0,
            envelope: Envelope::Constant,
            tags: SourceTags::default(),
        }
    }

    pub fn separable(profile: SpaceProfile, amplitude: f64, envelope: Envelope) -> Self {
        SourceSpec {
            profile: Some(profile),
            amplitude,
            envelope,
            tags: SourceTags::default(),
        }
    }

    pub fn with_tags(mut self, tags: SourceTags) -> Self {
        self.tags = tags;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_none() || self.amplitude == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("source amplitude must be finite".into()));
        }
        if !self.is_zero() {
            self.envelope.validate()?;
            if !self.envelope.square_integrable() {
                return Err(Error::InvalidParameter(
                    "source envelope must be square integrable in time".into(),
                ));
            }
        }
        if let Some(p) = self.tags.p {
            if !(p >= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "source tag p must lie in [1, ∞], got {p}"
                )));
            }
        }
        if let Some(q) = self.tags.q {
            if !(1.0..=2.0).contains(&q) {
                return Err(Error::InvalidParameter(format!(
                    "source tag q must lie in [1, 2], got {q}"
                )));
            }
        }
        if let Some(d) = self.tags.delta {
            if !(d > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "source tag delta must be positive, got {d}"
                )));
            }
        }
        Ok(())
    }

    /// Nodal values of `f(·, t)`.
    pub fn density(&self, grid: &Grid, t: f64) -> Vec<f64> {
        match self.profile {
            Some(p) if self.amplitude != 0.0 => {
                let s = self.amplitude * self.envelope.value(t);
                (0..grid.len()).map(|i| s * p.value(grid, grid.coords(i))).collect()
            }
            _ => vec![0.0; grid.len()],
        }
    }

    /// Load vector `ℓ` of the heat equation: `ℓ_i = w_i f_i`, plus the Robin
    /// exchange `η b_i j'(θ_Γ(t))` on boundary nodes.
    pub fn load(&self, grid: &Grid, bc: &BoundarySpec, model: &ModelSpec, t: f64) -> Result<Vec<f64>> {
        let w = grid.weights();
        let mut l: Vec<f64> = self.density(grid, t).iter().zip(&w).map(|(f, w)| f * w).collect();
        if let (Some(eta), Some(tg)) = (bc.eta(), bc.theta_gamma(model.theta_inf(), t)) {
            let ug = model.j.dj(tg)?;
            if ug != 0.0 {
                for (li, b) in l.iter_mut().zip(grid.boundary_weights()) {
                    *li += eta * b * ug;
                }
            }
        }
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_profile_vanishes_on_boundary() {
        let grid = Grid::rect(2.0, 1.0, 5, 5).unwrap();
        let s = SourceSpec::separable(SpaceProfile::Sine, 0.1, Envelope::Power { exponent: 3.0 });
        let f = s.density(&grid, 1.0);
        for i in 0..grid.len() {
            if grid.is_boundary(i) {
                assert!(f[i].abs() < 1e-16);
            }
        }
        // centre node (1, 0.5): 0.1 · 1 · 2⁻³
        assert!((f[12] - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_square_integrable_envelopes() {
        let s = SourceSpec::separable(SpaceProfile::Constant, 1.0, Envelope::Power { exponent: 0.4 });
        assert!(s.validate().is_err());
        assert!(SourceSpec::zero().validate().is_ok());
    }

    #[test]
    fn robin_load_carries_boundary_temperature() {
        let grid = Grid::line(1.0, 5).unwrap();
        let bc = BoundarySpec::RobinTheta {
            eta: 2.0,
            amplitude: 0.5,
            envelope: Envelope::Constant,
        };
        let model = ModelSpec::caginalp_quartic(1.0);
        let l = SourceSpec::zero().load(&grid, &bc, &model, 0.0).unwrap();
        assert_eq!(l, vec![1.0, 0.0, 0.0, 0.0, 1.0]);
    }
}
