//! Moreau-envelope surrogates `j_n`, `W_n` that are finite on all of ℝ.
//!
//! For `j` we split off `(σ/4)(r - θ∞)²`, take the Moreau envelope of the
//! remaining convex part with parameter `ρ = 1/n` and add the quadratic back.
//! For `W` the convex part is `W + κr²/2`; after the envelope we subtract the
//! quadratic again. Envelopes are finite and `C^{1,1}` everywhere, lie below the
//! original function and converge to it pointwise as `ρ → 0`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{ConvexPotential, Interval, NonconvexPotential, ScalarLaw};

/// Metadata attached to a regularized potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regularization {
    pub n: usize,
    pub rho: f64,
    /// Smallest `n` from which the guaranteed constants hold. The quadratic
    /// split keeps `j_n'' ≥ σ/2` and `W_n'' ≥ -κ` for every `n ≥ 1`.
    pub n0: usize,
    /// Sampled properties that could not be confirmed.
    pub warnings: Vec<String>,
}

/// `q (r - c)² + M_ρ[f - q (· - c)²](r)` for a base law `f` on `domain`.
#[derive(Debug, Clone)]
pub struct MoreauLaw {
    base: Arc<dyn ScalarLaw>,
    domain: Interval,
    q: f64,
    center: f64,
    rho: f64,
}

impl MoreauLaw {
    pub fn new(base: Arc<dyn ScalarLaw>, domain: Interval, q: f64, center: f64, rho: f64) -> Self {
        MoreauLaw {
            base,
            domain,
            q,
            center,
            rho,
        }
    }

    fn phi(&self, y: f64) -> f64 {
        let s = y - self.center;
        self.base.value(y) - self.q * s * s
    }

    fn dphi(&self, y: f64) -> f64 {
        self.base.d1(y) - 2.0 * self.q * (y - self.center)
    }

    fn d2phi(&self, y: f64) -> f64 {
        self.base.d2(y) - 2.0 * self.q
    }

    /// Proximal point of the convex part at `r`. The second component is
    /// `true` when the minimizer sits on a (closed) domain endpoint.
    pub fn prox(&self, r: f64) -> (f64, bool) {
        let rho = self.rho;
        let h = |y: f64| self.dphi(y) + (y - r) / rho;
        let (lo, hi) = (self.domain.lo, self.domain.hi);

        let mut y0 = r;
        if !self.domain.contains(y0) {
            y0 = if r <= lo { lo } else { hi };
            y0 = nudge_inside(y0, &self.domain);
        }
        let h0 = h(y0);
        if h0 == 0.0 {
            return (y0, false);
        }

        // Bracket [a, b] with h(a) < 0 < h(b).
        let (mut a, mut b);
        if h0 > 0.0 {
            b = y0;
            let mut found = None;
            if lo.is_finite() {
                let mut gap = y0 - lo;
                for _ in 0..1100 {
                    gap *= 0.5;
                    let y = lo + gap;
                    if y <= lo {
                        break;
                    }
                    if h(y) < 0.0 {
                        found = Some(y);
                        break;
                    }
                    b = y;
                }
                match found {
                    Some(y) => a = y,
                    None => return (lo, true),
                }
            } else {
                let mut step = 1.0 + y0.abs();
                loop {
                    let y = y0 - step;
                    if h(y) < 0.0 {
                        a = y;
                        break;
                    }
                    b = y;
                    step *= 2.0;
                }
            }
        } else {
            a = y0;
            let mut found = None;
            if hi.is_finite() {
                let mut gap = hi - y0;
                for _ in 0..1100 {
                    gap *= 0.5;
                    let y = hi - gap;
                    if y >= hi {
                        break;
                    }
                    if h(y) > 0.0 {
                        found = Some(y);
                        break;
                    }
                    a = y;
                }
                match found {
                    Some(y) => b = y,
                    None => return (hi, true),
                }
            } else {
                let mut step = 1.0 + y0.abs();
                loop {
                    let y = y0 + step;
                    if h(y) > 0.0 {
                        b = y;
                        break;
                    }
                    a = y;
                    step *= 2.0;
                }
            }
        }

        // Safeguarded Newton inside the bracket.
        let mut y = 0.5 * (a + b);
        for _ in 0..200 {
            let hy = h(y);
            if hy == 0.0 {
                return (y, false);
            }
            if hy < 0.0 {
                a = y;
            } else {
                b = y;
            }
            let slope = self.d2phi(y) + 1.0 / rho;
            let mut next = y - hy / slope;
            if !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) || b - a <= 1e-15 * (1.0 + y.abs()) {
                return (next, false);
            }
            y = next;
        }
        (y, false)
    }
}

fn nudge_inside(y: f64, dom: &Interval) -> f64 {
    let scale = 1e-12 * (1.0 + y.abs());
    if y <= dom.lo {
        dom.lo + scale
    } else if y >= dom.hi {
        dom.hi - scale
    } else {
        y
    }
}

impl ScalarLaw for MoreauLaw {
    fn value(&self, r: f64) -> f64 {
        let (y, pinned) = self.prox(r);
        let phi = if pinned {
            self.phi(nudge_inside(y, &self.domain))
        } else {
            self.phi(y)
        };
        let s = r - self.center;
        self.q * s * s + phi + (r - y) * (r - y) / (2.0 * self.rho)
    }

    fn d1(&self, r: f64) -> f64 {
        let (y, _) = self.prox(r);
        2.0 * self.q * (r - self.center) + (r - y) / self.rho
    }

    fn d2(&self, r: f64) -> f64 {
        let (y, pinned) = self.prox(r);
        let env = if pinned {
            1.0 / self.rho
        } else {
            let c = self.d2phi(y);
            c / (1.0 + self.rho * c)
        };
        2.0 * self.q + env
    }
}

/// Potentials that admit a Moreau-envelope surrogate.
pub trait Regularized: Sized {
    fn regularize(&self, n: usize) -> Result<Self>;
}

/// Returns the `n`-th regularized surrogate (`ρ = 1/n`).
pub fn regularize<P: Regularized>(potential: &P, n: usize) -> Result<P> {
    potential.regularize(n)
}

fn check_n(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("regularization index n must be ≥ 1".into()));
    }
    Ok(1.0 / n as f64)
}

impl Regularized for ConvexPotential {
    fn regularize(&self, n: usize) -> Result<Self> {
        let rho = check_n(n)?;
        let law = MoreauLaw::new(self.law_arc(), self.domain, self.sigma / 4.0, self.theta_inf, rho);
        let mut out = ConvexPotential::new(
            format!("{}_reg{}", self.name, n),
            Arc::new(law),
            Interval::REAL,
            self.sigma / 2.0,
            self.theta_inf,
        );
        out.tau_c = self.tau_c;
        out.regularization = Some(Regularization {
            n,
            rho,
            n0: 1,
            warnings: Vec::new(),
        });
        Ok(out)
    }
}

impl Regularized for NonconvexPotential {
    fn regularize(&self, n: usize) -> Result<Self> {
        let rho = check_n(n)?;
        let law = Arc::new(MoreauLaw::new(self.law_arc(), self.domain, -self.kappa / 2.0, 0.0, rho));
        let mu_half = self.mu / 2.0;

        let mut warnings = Vec::new();
        let span = 10.0;
        let samples = 200;
        let mut worst: Option<(f64, f64)> = None;
        for side in [-1.0, 1.0] {
            let start = if side < 0.0 { self.core.lo } else { self.core.hi };
            for i in 0..samples {
                let r = start + side * span * (i as f64 + 0.5) / samples as f64;
                let ratio = law.d1(r) / r;
                if ratio < mu_half - 1e-10 && worst.is_none_or(|(_, w)| ratio < w) {
                    worst = Some((r, ratio));
                }
            }
        }
        if let Some((r, ratio)) = worst {
            warnings.push(format!(
                "coercivity W_n'(r)/r >= mu/2 = {mu_half} not met at r = {r} (ratio {ratio})"
            ));
        }

        let mut out = NonconvexPotential::new(
            format!("{}_reg{}", self.name, n),
            law,
            Interval::REAL,
            self.core,
            self.kappa,
            mu_half,
            false,
            self.critical_points.clone(),
        );
        out.regularization = Some(Regularization {
            n,
            rho,
            n0: 1,
            warnings,
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;

    #[test]
    fn quadratic_envelope_closed_form() {
        let j = ConvexPotential::caginalp();
        let j1 = regularize(&j, 1).unwrap();
        for r in [-3.0, -0.5, 0.0, 1.0, 7.0] {
            let expected = r * r * (0.25 + 1.0 / 6.0);
            assert!((j1.j(r).unwrap() - expected).abs() < 1e-12 * (1.0 + expected));
        }
    }

    #[test]
    fn rejects_zero_index() {
        assert!(matches!(
            regularize(&ConvexPotential::caginalp(), 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn finite_outside_original_domain() {
        let j = ConvexPotential::mixed(1.0).unwrap();
        let jn = regularize(&j, 10).unwrap();
        for r in [-1.0, -5.0, -100.0] {
            assert!(j.j(r).is_err());
            let v = jn.j(r).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
        let w = NonconvexPotential::logarithmic(2.0).unwrap();
        let wn = regularize(&w, 10).unwrap();
        assert!(wn.domain().contains(3.0));
        assert!(wn.w(3.0).unwrap().is_finite());
    }

    #[test]
    fn equilibrium_is_preserved() {
        let jn = regularize(&ConvexPotential::mixed(1.0).unwrap(), 3).unwrap();
        assert!(jn.dj(0.0).unwrap().abs() < 1e-14);
        assert!(jn.j(0.0).unwrap().abs() < 1e-14);
    }
}
