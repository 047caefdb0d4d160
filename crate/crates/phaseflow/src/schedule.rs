//! Time envelopes for sources and boundary data.

use serde::Serialize;

use crate::error::{Error, Result};

/// Scalar time profile `e(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `e ≡ 1`.
    Constant,
    /// `(1 - t/t_end)²` on `[0, t_end]`, zero afterwards.
    Compact { t_end: f64 },
    /// `exp(-a t)`.
    Exponential { rate: f64 },
    /// `(1 + t)^(-b)`.
    Power { exponent: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Compact { t_end } => {
                if t >= t_end {
                    0.0
                } else {
                    let s = 1.0 - t / t_end;
                    s * s
                }
            }
            Envelope::Exponential { rate } => (-rate * t).exp(),
            Envelope::Power { exponent } => (1.0 + t).powf(-exponent),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Envelope::Constant => true,
            Envelope::Compact { t_end } => t_end > 0.0,
            Envelope::Exponential { rate } => rate > 0.0,
            Envelope::Power { exponent } => exponent > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid envelope {self:?}")))
        }
    }

    /// Whether `∫_0^∞ e(t)² dt < ∞`.
    pub fn square_integrable(&self) -> bool {
        match *self {
            Envelope::Constant => false,
            Envelope::Compact { .. } | Envelope::Exponential { .. } => true,
            Envelope::Power { exponent } => exponent > 0.5,
        }
    }

    /// Whether `sup_t t^{1+δ} ∫_t^∞ e² < ∞` holds analytically.
    ///
    /// For `(1+t)^{-b}` the tail integral decays like `t^{1-2b}`, so the
    /// condition is `b ≥ (2 + δ)/2`.
    pub fn tail_condition(&self, delta: f64) -> bool {
        match *self {
            Envelope::Constant => false,
            Envelope::Compact { .. } | Envelope::Exponential { .. } => true,
            Envelope::Power { exponent } => exponent >= (2.0 + delta) / 2.0,
        }
    }
}
