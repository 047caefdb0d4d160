//! Sampled verification of the structural hypotheses on `(j, W, λ)`.
//!
//! The hypotheses hold "almost everywhere", which no program can check. We
//! sample a deterministic uniform grid on the truncated domain
//! `[max(inf D, c - 50), min(sup D, c + 50)]` (cell midpoints, so open ends are
//! never hit) and add probes that walk towards every domain end: `c ± 10^k`
//! on unbounded sides and `end ∓ 10^{-k}` on bounded ones. The probes are what
//! catch curvature that only degenerates asymptotically.

use serde::Serialize;

use super::{Interval, ModelSpec, ScalarLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Claimed property not confirmed; not a refusal.
    Warning,
    /// Nothing to check (e.g. no growth exponent declared).
    Skipped,
}

/// Outcome for one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub status: CheckStatus,
    /// Sample point where the margin was smallest.
    pub witness: Option<f64>,
    /// Smallest margin observed (negative means violated).
    pub worst_margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
    pub suggestions: Vec<String>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `true` when nothing failed (warnings and skips are allowed).
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

const TOL: f64 = 1e-12;

/// Bulk grid plus probes towards the domain ends.
fn sample_points(dom: Interval, center: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let a = dom.lo.max(center - 50.0);
    let b = dom.hi.min(center + 50.0);
    let bulk: Vec<f64> = (0..count)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
        .collect();
    let mut probes = Vec::new();
    if dom.lo.is_finite() {
        probes.extend((1..=12).map(|k| dom.lo + 10f64.powi(-k) * (1.0 + dom.lo.abs())));
    } else {
        probes.extend((2..=12).map(|k| center - 10f64.powi(k)));
    }
    if dom.hi.is_finite() {
        probes.extend((1..=12).map(|k| dom.hi - 10f64.powi(-k) * (1.0 + dom.hi.abs())));
    } else {
        probes.extend((2..=12).map(|k| center + 10f64.powi(k)));
    }
    probes.retain(|r| dom.contains(*r));
    (bulk, probes)
}

fn joined((bulk, probes): &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
    bulk.iter().chain(probes).cloned().collect()
}

/// Runs the minimum of `margin(r)` over `points` and classifies it.
fn scan(name: &str, points: &[f64], margin: impl Fn(f64) -> f64, detail: &str) -> HypothesisCheck {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &r in points {
        let m = margin(r);
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        if m < worst {
            worst = m;
            witness = Some(r);
        }
    }
    HypothesisCheck {
        name: name.to_string(),
        status: if worst >= -TOL {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        witness,
        worst_margin: worst,
        detail: detail.to_string(),
    }
}

fn fail(name: &str, detail: String) -> HypothesisCheck {
    HypothesisCheck {
        name: name.into(),
        status: CheckStatus::Fail,
        witness: None,
        worst_margin: f64::NEG_INFINITY,
        detail,
    }
}

/// Checks `hp_lambda`, `hp_W1`, `hp_W2`, `hp_j1`, `hp_j2`, the optional growth
/// bound `j_growth` on `j''`, and reports the declared analyticity of `W`.
///
/// Failures are data: the report lists the worst witness of each check.
pub fn validate_hypotheses(spec: &ModelSpec, sample_count: usize) -> ValidationReport {
    let count = sample_count.max(100);
    let mut checks = Vec::new();
    let mut suggestions = Vec::new();

    // hp_lambda: |λ''| ≤ Λ.
    let lam = &spec.lambda;
    let lam_pts = joined(&sample_points(Interval::new(-50.0, 50.0), 0.0, count));
    checks.push(scan(
        "hp_lambda",
        &lam_pts,
        |r| lam.curvature_bound - lam.d2(r).abs(),
        &format!("|lambda''| <= Lambda = {}", lam.curvature_bound),
    ));

    // hp_W1: W ≥ 0 and W'' ≥ -κ.
    let w = &spec.w;
    let wl = w.law_arc();
    let w_pts = joined(&sample_points(w.domain, 0.0, count));
    checks.push(scan(
        "hp_W1",
        &w_pts,
        |r| wl.value(r).min(wl.d2(r) + w.kappa),
        &format!("W >= 0 and W'' >= -kappa = {}", -w.kappa),
    ));

    // hp_W2: W'(r)/r ≥ μ off I0, with 0 ∈ I0 ⊂⊂ I.
    if !w.core.compactly_inside(&w.domain) || !w.core.contains(0.0) {
        checks.push(fail(
            "hp_W2",
            format!(
                "core interval {} must contain 0 and have closure in {}",
                w.core, w.domain
            ),
        ));
    } else {
        let outer: Vec<f64> = w_pts.iter().cloned().filter(|r| !w.core.contains(*r)).collect();
        checks.push(scan(
            "hp_W2",
            &outer,
            |r| wl.d1(r) / r - w.mu,
            &format!("W'(r)/r >= mu = {} outside {}", w.mu, w.core),
        ));
    }

    // hp_j1: j ≥ 0 and j'' ≥ σ.
    let j = &spec.j;
    let jl = j.law_arc();
    let j_samples = sample_points(j.domain, j.theta_inf, count);
    let hpj1 = scan(
        "hp_j1",
        &joined(&j_samples),
        |r| jl.value(r).min(jl.d2(r) - j.sigma),
        &format!("j >= 0 and j'' >= sigma = {}", j.sigma),
    );
    if hpj1.status == CheckStatus::Fail {
        let degenerate_tail = hpj1.witness.is_some_and(|r| (r - j.theta_inf).abs() > 50.0);
        let hint = if degenerate_tail {
            "j'' decays to 0 far from equilibrium: add a quadratic part, e.g. mixed_j = r^2/2 + Penrose-Fife law"
        } else {
            "declared sigma exceeds the curvature of j: lower sigma or use mixed_j"
        };
        suggestions.push(format!("{}: {}", j.name, hint));
    }
    checks.push(hpj1);

    // hp_j2: θ∞ ∈ J with j'(θ∞) = 0 and j(θ∞) = 0.
    if !j.domain.contains(j.theta_inf) {
        checks.push(fail(
            "hp_j2",
            format!("theta_inf = {} outside J = {}", j.theta_inf, j.domain),
        ));
    } else {
        let d = jl.d1(j.theta_inf).abs();
        let v = jl.value(j.theta_inf).abs();
        let margin = (1e-12 - d).min(1e-14 - v);
        checks.push(HypothesisCheck {
            name: "hp_j2".into(),
            status: if margin >= 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            witness: Some(j.theta_inf),
            worst_margin: margin,
            detail: format!("|j'(theta_inf)| = {d:e}, j(theta_inf) = {v:e}"),
        });
    }

    checks.push(growth_check(jl.as_ref(), j.growth_exponent, &j_samples));

    checks.push(HypothesisCheck {
        name: "W_analytic".into(),
        status: if w.analytic {
            CheckStatus::Pass
        } else {
            CheckStatus::Warning
        },
        witness: None,
        worst_margin: 0.0,
        detail: if w.analytic {
            format!("{} declared real analytic on {}", w.name, w.core)
        } else {
            format!("{} not declared analytic: no convergence-rate guarantee", w.name)
        },
    });

    ValidationReport { checks, suggestions }
}

/// `|j''| ≤ c (1 + |j'|^α)`: every finite sample yields some finite `c`, so the
/// check is that the ratio does not blow up along the probes towards the ends
/// of the domain. The probe maximum may exceed the bulk maximum by at most a
/// factor 2.
fn growth_check(law: &dyn ScalarLaw, alpha: Option<f64>, (bulk, probes): &(Vec<f64>, Vec<f64>)) -> HypothesisCheck {
    let Some(alpha) = alpha else {
        return HypothesisCheck {
            name: "j_growth".into(),
            status: CheckStatus::Skipped,
            witness: None,
            worst_margin: 0.0,
            detail: "no growth exponent declared".into(),
        };
    };
    if alpha > 3.0 {
        return fail("j_growth", format!("growth exponent {alpha} exceeds 3"));
    }
    let ratio = |r: f64| law.d2(r).abs() / (1.0 + law.d1(r).abs().powf(alpha));
    let c = bulk
        .iter()
        .cloned()
        .map(ratio)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst_probe = 0.0;
    let mut witness = None;
    for &r in probes {
        let q = ratio(r);
        if q > worst_probe || q.is_nan() {
            worst_probe = if q.is_nan() { f64::INFINITY } else { q };
            witness = Some(r);
        }
    }
    let margin = 2.0 * c - worst_probe;
    HypothesisCheck {
        name: "j_growth".into(),
        status: if margin >= 0.0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        witness,
        worst_margin: margin,
        detail: format!("alpha = {alpha}: bulk constant {c:e}, probe maximum {worst_probe:e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConvexPotential, LatentHeat, NonconvexPotential};

    fn spec_with(j: ConvexPotential) -> ModelSpec {
        ModelSpec::new(j, NonconvexPotential::quartic(), LatentHeat::linear(1.0))
    }

    #[test]
    fn caginalp_spec_passes() {
        let report = validate_hypotheses(&ModelSpec::caginalp_quartic(1.0), 1000);
        assert!(report.all_pass(), "{report:#?}");
        assert!(report.suggestions.is_empty());
    }

    #[test]
    fn pure_penrose_fife_fails_hpj1_at_large_r() {
        let j = ConvexPotential::penrose_fife(1.0, 0.5).unwrap();
        let report = validate_hypotheses(&spec_with(j), 1000);
        let c = report.check("hp_j1").unwrap();
        assert_eq!(c.status, CheckStatus::Fail);
        assert!(c.witness.unwrap() > 1.0);
        assert!(report.suggestions.iter().any(|s| s.contains("mixed_j")));
    }

    #[test]
    fn mixed_law_passes_hpj1_and_growth() {
        let report = validate_hypotheses(&spec_with(ConvexPotential::mixed(1.0).unwrap()), 1000);
        assert_eq!(report.check("hp_j1").unwrap().status, CheckStatus::Pass);
        assert_eq!(report.check("j_growth").unwrap().status, CheckStatus::Pass);
        assert!(report.all_pass());
    }

    #[test]
    fn mixed_law_with_zero_growth_exponent_is_refuted() {
        let j = ConvexPotential::mixed(1.0).unwrap().with_growth_exponent(0.0);
        let report = validate_hypotheses(&spec_with(j), 1000);
        assert_eq!(report.check("j_growth").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn logarithmic_well_passes() {
        let spec = ModelSpec::new(
            ConvexPotential::caginalp(),
            NonconvexPotential::logarithmic(2.0).unwrap(),
            LatentHeat::tanh(0.5),
        );
        let report = validate_hypotheses(&spec, 1000);
        assert!(report.all_pass(), "{report:#?}");
    }

    #[test]
    fn deterministic() {
        let spec = spec_with(ConvexPotential::penrose_fife(2.0, 0.1).unwrap());
        assert_eq!(validate_hypotheses(&spec, 500), validate_hypotheses(&spec, 500));
    }
}
