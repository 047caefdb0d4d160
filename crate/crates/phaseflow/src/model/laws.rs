//! Closed-form laws behind the built-in potentials.

use super::ScalarLaw;

/// `r²/2`.
#[derive(Debug, Clone, Copy)]
pub struct Caginalp;

impl ScalarLaw for Caginalp {
    fn value(&self, r: f64) -> f64 {
        0.5 * r * r
    }
    fn d1(&self, r: f64) -> f64 {
        r
    }
    fn d2(&self, _r: f64) -> f64 {
        1.0
    }
}

/// `r/τc - ln(1 + r/τc)` on `(-τc, ∞)`.
#[derive(Debug, Clone, Copy)]
pub struct PenroseFife {
    pub tau_c: f64,
}

impl ScalarLaw for PenroseFife {
    fn value(&self, r: f64) -> f64 {
        let x = r / self.tau_c;
        x - x.ln_1p()
    }
    fn d1(&self, r: f64) -> f64 {
        // 1/τc - 1/(r + τc), written without cancellation at r = 0.
        r / (self.tau_c * (r + self.tau_c))
    }
    fn d2(&self, r: f64) -> f64 {
        let s = r + self.tau_c;
        1.0 / (s * s)
    }
}

/// Caginalp plus Penrose-Fife.
#[derive(Debug, Clone, Copy)]
pub struct MixedLaw {
    pub tau_c: f64,
}

impl ScalarLaw for MixedLaw {
    fn value(&self, r: f64) -> f64 {
        Caginalp.value(r) + PenroseFife { tau_c: self.tau_c }.value(r)
    }
    fn d1(&self, r: f64) -> f64 {
        Caginalp.d1(r) + PenroseFife { tau_c: self.tau_c }.d1(r)
    }
    fn d2(&self, r: f64) -> f64 {
        Caginalp.d2(r) + PenroseFife { tau_c: self.tau_c }.d2(r)
    }
}

/// `(r² - 1)²/4`.
#[derive(Debug, Clone, Copy)]
pub struct QuarticWell;

impl ScalarLaw for QuarticWell {
    fn value(&self, r: f64) -> f64 {
        let s = r * r - 1.0;
        0.25 * s * s
    }
    fn d1(&self, r: f64) -> f64 {
        r * (r * r - 1.0)
    }
    fn d2(&self, r: f64) -> f64 {
        3.0 * r * r - 1.0
    }
}

/// Shifted logarithmic double well on `(-1, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct LogarithmicWell {
    pub c: f64,
    /// Positive minimizer, `atanh(r*) = c r*`.
    pub r_star: f64,
    shift: f64,
}

impl LogarithmicWell {
    pub fn new(c: f64) -> Self {
        // f(r) = atanh(r) - c r is negative on (0, r*) and positive after.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        // Start right of the local maximum of -f, where f < 0.
        let r_neg = (1.0 - 1.0 / c).sqrt();
        lo = lo.max(r_neg);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.atanh() - c * mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        let r_star = 0.5 * (lo + hi);
        let mut law = LogarithmicWell { c, r_star, shift: 0.0 };
        law.shift = -law.value(r_star);
        law
    }
}

impl ScalarLaw for LogarithmicWell {
    fn value(&self, r: f64) -> f64 {
        0.5 * ((1.0 + r) * r.ln_1p() + (1.0 - r) * (-r).ln_1p()) - 0.5 * self.c * r * r + self.shift
    }
    fn d1(&self, r: f64) -> f64 {
        r.atanh() - self.c * r
    }
    fn d2(&self, r: f64) -> f64 {
        1.0 / (1.0 - r * r) - self.c
    }
}

/// `ℓ r`.
#[derive(Debug, Clone, Copy)]
pub struct LinearLatent {
    pub ell: f64,
}

impl ScalarLaw for LinearLatent {
    fn value(&self, r: f64) -> f64 {
        self.ell * r
    }
    fn d1(&self, _r: f64) -> f64 {
        self.ell
    }
    fn d2(&self, _r: f64) -> f64 {
        0.0
    }
    fn secant(&self, _a: f64, _b: f64) -> Option<f64> {
        Some(self.ell)
    }
}

/// `ℓ tanh r`.
#[derive(Debug, Clone, Copy)]
pub struct TanhLatent {
    pub ell: f64,
}

impl ScalarLaw for TanhLatent {
    fn value(&self, r: f64) -> f64 {
        self.ell * r.tanh()
    }
    fn d1(&self, r: f64) -> f64 {
        let c = r.cosh();
        self.ell / (c * c)
    }
    fn d2(&self, r: f64) -> f64 {
        let c = r.cosh();
        -2.0 * self.ell * r.tanh() / (c * c)
    }
    fn secant(&self, a: f64, b: f64) -> Option<f64> {
        // tanh b - tanh a = tanh(b - a) (1 - tanh a tanh b)
        let d = b - a;
        let ratio = if d.abs() < 1e-6 {
            1.0 - d * d / 3.0
        } else {
            d.tanh() / d
        };
        Some(self.ell * ratio * (1.0 - a.tanh() * b.tanh()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(law: &dyn ScalarLaw, points: &[f64]) {
        for &r in points {
            let h = 1e-5;
            let fd1 = (law.value(r + h) - law.value(r - h)) / (2.0 * h);
            let fd2 = (law.d1(r + h) - law.d1(r - h)) / (2.0 * h);
            assert!((fd1 - law.d1(r)).abs() < 1e-6 * (1.0 + fd1.abs()), "d1 at {r}");
            assert!((fd2 - law.d2(r)).abs() < 1e-5 * (1.0 + fd2.abs()), "d2 at {r}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pts = [-0.7, -0.2, 0.0, 0.3, 0.9];
        check_derivatives(&Caginalp, &pts);
        check_derivatives(&PenroseFife { tau_c: 1.0 }, &pts);
        check_derivatives(&MixedLaw { tau_c: 1.0 }, &pts);
        check_derivatives(&QuarticWell, &pts);
        check_derivatives(&LogarithmicWell::new(2.0), &pts);
        check_derivatives(&TanhLatent { ell: 0.8 }, &pts);
    }

    #[test]
    fn logarithmic_well_minimum_is_zero() {
        let law = LogarithmicWell::new(2.0);
        assert!((law.r_star.atanh() - 2.0 * law.r_star).abs() < 1e-12);
        assert!(law.value(law.r_star).abs() < 1e-15);
        assert!(law.value(-law.r_star).abs() < 1e-14);
        assert!(law.value(0.0) > 0.0);
    }
}
