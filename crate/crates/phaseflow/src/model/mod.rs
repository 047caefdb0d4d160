//! Constitutive functions of the phase-field system.
//!
//! A model is the triple `(j, W, λ)`:
//!
//! * `j` ([`ConvexPotential`]) is the heat-flux potential. The heat equation
//!   diffuses `u = j'(θ)` rather than `θ`, so `j(r) = r²/2` is the Caginalp
//!   system and a logarithmic `j` gives Penrose-Fife.
//! * `W` ([`NonconvexPotential`]) is the configuration potential of the order
//!   parameter. It may be nonconvex, but only up to a quadratic: `W + κr²/2`
//!   is convex.
//! * `λ` ([`LatentHeat`]) couples the two equations through the internal
//!   energy `θ + λ(χ)`.
//!
//! Every potential is a closed-form [`ScalarLaw`] together with its domain
//! and the structural constants the analysis needs. Arguments outside the
//! open domain are rejected with [`Error::DomainViolation`]; nothing ever
//! stores an infinite value. [`regularize`] produces finite-everywhere
//! surrogates when an unbounded extension is needed.

mod builtin;
mod laws;
mod regularize;
mod validate;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use builtin::{builtin, Component, Params};
pub use laws::{Caginalp, LinearLatent, LogarithmicWell, MixedLaw, PenroseFife, QuarticWell, TanhLatent};
pub use regularize::{regularize, MoreauLaw, Regularization, Regularized};
pub use validate::{validate_hypotheses, CheckStatus, HypothesisCheck, ValidationReport};

/// An open real interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "empty interval ({lo}, {hi})");
        Interval { lo, hi }
    }

    #[inline]
    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    pub fn contains_closed(&self, r: f64) -> bool {
        r >= self.lo && r <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// `true` when the closure of `self` lies inside the open interval `outer`.
    pub fn compactly_inside(&self, outer: &Interval) -> bool {
        self.is_bounded() && outer.contains(self.lo) && outer.contains(self.hi)
    }

    /// Distance from `r` to the nearer endpoint (infinite for `ℝ`).
    pub fn distance_to_boundary(&self, r: f64) -> f64 {
        (r - self.lo).min(self.hi - r)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Which derivative [`Potential::evaluate`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    First,
    Second,
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            0 => Ok(Order::Value),
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidParameter(format!("derivative order {k} not in 0..=2"))),
        }
    }
}

/// A scalar constitutive law with two derivatives.
///
/// Implementations may assume the argument lies in the owning potential's
/// domain; the domain check happens in [`Potential::evaluate`]. This is the
/// library-level extension point for user-defined potentials.
pub trait ScalarLaw: Send + Sync + fmt::Debug {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;

    /// Exact divided difference `(f(b) - f(a)) / (b - a)` when the law has a
    /// cancellation-free closed form. Only consulted for latent heats.
    fn secant(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }
}

/// Uniform accessor over the three kinds of constitutive functions.
pub trait Potential {
    fn name(&self) -> &str;
    fn domain(&self) -> Interval;
    fn law(&self) -> &dyn ScalarLaw;

    fn evaluate(&self, order: Order, r: f64) -> Result<f64> {
        let dom = self.domain();
        if !dom.contains(r) {
            return Err(Error::DomainViolation {
                potential: self.name().to_string(),
                r,
                lo: dom.lo,
                hi: dom.hi,
            });
        }
        let law = self.law();
        Ok(match order {
            Order::Value => law.value(r),
            Order::First => law.d1(r),
            Order::Second => law.d2(r),
        })
    }
}

/// Heat-flux potential `j`: uniformly convex with `j'' ≥ σ`, minimum 0 at `θ∞`.
#[derive(Clone, Debug)]
pub struct ConvexPotential {
    pub name: String,
    law: Arc<dyn ScalarLaw>,
    pub domain: Interval,
    /// Convexity modulus: `j'' ≥ sigma` on the domain.
    pub sigma: f64,
    /// Equilibrium temperature, `j'(theta_inf) = 0`.
    pub theta_inf: f64,
    /// Exponent `α ≤ 3` in `|j''| ≤ c(1 + |j'|^α)`, if claimed.
    pub growth_exponent: Option<f64>,
    /// Singularity offset of logarithmic laws; the domain is `(-tau_c, ∞)`.
    pub tau_c: Option<f64>,
    pub regularization: Option<Regularization>,
}

impl ConvexPotential {
    pub fn new(name: impl Into<String>, law: Arc<dyn ScalarLaw>, domain: Interval, sigma: f64, theta_inf: f64) -> Self {
        ConvexPotential {
            name: name.into(),
            law,
            domain,
            sigma,
            theta_inf,
            growth_exponent: None,
            tau_c: None,
            regularization: None,
        }
    }

    pub fn with_growth_exponent(mut self, alpha: f64) -> Self {
        self.growth_exponent = Some(alpha);
        self
    }

    pub fn with_tau_c(mut self, tau_c: f64) -> Self {
        self.tau_c = Some(tau_c);
        self
    }

    /// `j(r) = r²/2`, the Caginalp law.
    pub fn caginalp() -> Self {
        ConvexPotential::new("caginalp_j", Arc::new(Caginalp), Interval::REAL, 1.0, 0.0).with_growth_exponent(0.0)
    }

    /// `j(r) = r/τc - ln(1 + r/τc)`, the Penrose-Fife law normalized so that
    /// `j(0) = j'(0) = 0`. Its curvature `(r+τc)⁻²` vanishes at infinity, so no
    /// `σ > 0` is valid on the whole domain; the declared `sigma` is only
    /// recorded for [`validate_hypotheses`] to refute.
    pub fn penrose_fife(tau_c: f64, sigma: f64) -> Result<Self> {
        check_positive("tau_c", tau_c)?;
        check_positive("sigma", sigma)?;
        Ok(ConvexPotential::new(
            "penrose_fife_j",
            Arc::new(PenroseFife { tau_c }),
            Interval::new(-tau_c, f64::INFINITY),
            sigma,
            0.0,
        )
        .with_growth_exponent(2.0)
        .with_tau_c(tau_c))
    }

    /// `j(r) = r²/2 + r/τc - ln(1 + r/τc)`: Caginalp plus Penrose-Fife.
    /// `j'' = 1 + (r+τc)⁻² ≥ 1`, and `j'' ≤ 1 + j'²` near the singular end.
    pub fn mixed(tau_c: f64) -> Result<Self> {
        check_positive("tau_c", tau_c)?;
        Ok(ConvexPotential::new(
            "mixed_j",
            Arc::new(MixedLaw { tau_c }),
            Interval::new(-tau_c, f64::INFINITY),
            1.0,
            0.0,
        )
        .with_growth_exponent(2.0)
        .with_tau_c(tau_c))
    }

    pub fn j(&self, r: f64) -> Result<f64> {
        self.evaluate(Order::Value, r)
    }

    pub fn dj(&self, r: f64) -> Result<f64> {
        self.evaluate(Order::First, r)
    }

    pub fn d2j(&self, r: f64) -> Result<f64> {
        self.evaluate(Order::Second, r)
    }

    pub(crate) fn law_arc(&self) -> Arc<dyn ScalarLaw> {
        Arc::clone(&self.law)
    }
}

impl Potential for ConvexPotential {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> Interval {
        self.domain
    }
    fn law(&self) -> &dyn ScalarLaw {
        self.law.as_ref()
    }
}

/// Configuration potential `W ≥ 0` with `W'' ≥ -κ` and `W'(r)/r ≥ μ` off `I0`.
#[derive(Clone, Debug)]
pub struct NonconvexPotential {
    pub name: String,
    law: Arc<dyn ScalarLaw>,
    /// Open domain `I`, containing 0.
    pub domain: Interval,
    /// Bounded core interval `I0` with closure inside `I`.
    pub core: Interval,
    pub kappa: f64,
    pub mu: f64,
    /// Whether `W` is real analytic on the core interval.
    pub analytic: bool,
    /// Zeros of `W'`, used to place the confinement interval of steady states.
    pub critical_points: Vec<f64>,
    pub regularization: Option<Regularization>,
}

impl NonconvexPotential {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        law: Arc<dyn ScalarLaw>,
        domain: Interval,
        core: Interval,
        kappa: f64,
        mu: f64,
        analytic: bool,
        critical_points: Vec<f64>,
    ) -> Self {
        NonconvexPotential {
            name: name.into(),
            law,
            domain,
            core,
            kappa,
            mu,
            analytic,
            critical_points,
            regularization: None,
        }
    }

    /// `W(r) = (r² - 1)²/4`. `W'' = 3r² - 1 ≥ -1` gives κ = 1; on `|r| ≥ 2`,
    /// `W'(r)/r = r² - 1 ≥ 3` gives μ = 3 with `I0 = (-2, 2)`.
    pub fn quartic() -> Self {
        NonconvexPotential::new(
            "quartic_W",
            Arc::new(QuarticWell),
            Interval::REAL,
            Interval::new(-2.0, 2.0),
            1.0,
            3.0,
            true,
            vec![-1.0, 0.0, 1.0],
        )
    }

    /// Logarithmic well on `I = (-1, 1)`:
    /// `W(r) = ½[(1+r)ln(1+r) + (1-r)ln(1-r)] - c r²/2 + w0`, with `c > 1`
    /// and `w0` chosen so that the minima at `±r*` (where `atanh r* = c r*`)
    /// are exactly 0. `W'' = 1/(1-r²) - c ≥ 1 - c`, so κ = c - 1. The core is
    /// `I0 = (-a, a)` with `a = (1 + r*)/2`, and `μ = atanh(a)/a - c`.
    pub fn logarithmic(c: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "logarithmic_W needs c > 1 for a double well, got {c}"
            )));
        }
        let law = LogarithmicWell::new(c);
        let r_star = law.r_star;
        let a = 0.5 * (1.0 + r_star);
        let mu = a.atanh() / a - c;
        Ok(NonconvexPotential::new(
            "logarithmic_W",
            Arc::new(law),
            Interval::new(-1.0, 1.0),
            Interval::new(-a, a),
            c - 1.0,
            mu,
            true,
            vec![-r_star, 0.0, r_star],
        ))
    }

    pub fn w(&self, r: f64) -> Result<f64> {
        self.evaluate(Order::Value, r)
    }

    pub fn dw(&self, r: f64) -> Result<f64> {
        self.evaluate(Order::First, r)
    }

    pub fn d2w(&self, r: f64) -> Result<f64> {
        self.evaluate(Order::Second, r)
    }

    /// Confinement interval `I1` for steady states: the hull of the zeros of
    /// `W'`, widened by 1% about its midpoint and clipped to the core.
    ///
    /// The true interval is only known to exist; this is a convention.
    pub fn confinement_interval(&self) -> (f64, f64) {
        let lo = self.critical_points.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.critical_points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() || !hi.is_finite() {
            return (self.core.lo, self.core.hi);
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo) * 1.01;
        ((mid - half).max(self.core.lo), (mid + half).min(self.core.hi))
    }

    pub(crate) fn law_arc(&self) -> Arc<dyn ScalarLaw> {
        Arc::clone(&self.law)
    }
}

impl Potential for NonconvexPotential {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> Interval {
        self.domain
    }
    fn law(&self) -> &dyn ScalarLaw {
        self.law.as_ref()
    }
}

/// Latent heat `λ ∈ C^{1,1}(ℝ)` with `|λ''| ≤ Λ`.
#[derive(Clone, Debug)]
pub struct LatentHeat {
    pub name: String,
    law: Arc<dyn ScalarLaw>,
    /// Curvature bound `Λ`.
    pub curvature_bound: f64,
}

impl LatentHeat {
    pub fn new(name: impl Into<String>, law: Arc<dyn ScalarLaw>, curvature_bound: f64) -> Self {
        LatentHeat {
            name: name.into(),
            law,
            curvature_bound,
        }
    }

    /// `λ(r) = ℓ r`; `λ'' ≡ 0`, so any positive Λ works. We record Λ = 1.
    pub fn linear(ell: f64) -> Self {
        LatentHeat::new("linear_lambda", Arc::new(LinearLatent { ell }), 1.0)
    }

    /// `λ(r) = ℓ tanh r`. `|λ''| = 2|ℓ| |tanh r| sech² r` peaks at
    /// `tanh² r = 1/3`, giving Λ = 4|ℓ|/(3√3).
    pub fn tanh(ell: f64) -> Self {
        LatentHeat::new(
            "tanh_lambda",
            Arc::new(TanhLatent { ell }),
            4.0 * ell.abs() / (3.0 * 3f64.sqrt()),
        )
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.law.value(r)
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        self.law.d1(r)
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        self.law.d2(r)
    }

    /// The divided difference `λ̂(a, b) = (λ(b) - λ(a)) / (b - a)`.
    ///
    /// With this secant the discrete chain rule
    /// `λ(b) - λ(a) = λ̂(a, b) (b - a)` is an identity, which is what lets
    /// the coupling terms of the time-discrete energy balance cancel.
    /// Laws with an exact closed form use it; otherwise the plain quotient is
    /// used, falling back to `λ'` at the midpoint when `|b - a|` is below
    /// `1e-12 (1 + |a| + |b|)`.
    pub fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if let Some(s) = self.law.secant(a, b) {
            return s;
        }
        if (b - a).abs() > 1e-12 * (1.0 + a.abs() + b.abs()) {
            (self.law.value(b) - self.law.value(a)) / (b - a)
        } else {
            self.law.d1(0.5 * (a + b))
        }
    }

    /// `∂λ̂(a, b)/∂b`, used only for Newton Jacobians.
    pub(crate) fn divided_difference_db(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        if d.abs() > 1e-4 * (1.0 + a.abs() + b.abs()) {
            (self.law.d1(b) - self.divided_difference(a, b)) / d
        } else {
            0.5 * self.law.d2(0.5 * (a + b))
        }
    }
}

impl Potential for LatentHeat {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> Interval {
        Interval::REAL
    }
    fn law(&self) -> &dyn ScalarLaw {
        self.law.as_ref()
    }
}

/// Free function form of [`LatentHeat::divided_difference`].
pub fn divided_difference_lambda(lambda: &LatentHeat, a: f64, b: f64) -> f64 {
    lambda.divided_difference(a, b)
}

/// The model triple with relaxation constants `ε = δ = 1`.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub j: ConvexPotential,
    pub w: NonconvexPotential,
    pub lambda: LatentHeat,
}

impl ModelSpec {
    /// Relaxation constant in front of `θ_t`.
    pub const EPSILON: f64 = 1.0;
    /// Relaxation constant in front of `χ_t`.
    pub const DELTA: f64 = 1.0;

    pub fn new(j: ConvexPotential, w: NonconvexPotential, lambda: LatentHeat) -> Self {
        ModelSpec { j, w, lambda }
    }

    /// Caginalp heat flux, quartic well, linear latent heat `λ = ℓ r`.
    pub fn caginalp_quartic(ell: f64) -> Self {
        ModelSpec::new(
            ConvexPotential::caginalp(),
            NonconvexPotential::quartic(),
            LatentHeat::linear(ell),
        )
    }

    pub fn theta_inf(&self) -> f64 {
        self.j.theta_inf
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}
