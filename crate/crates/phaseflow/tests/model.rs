use std::sync::Arc;

use proptest::prelude::*;

use phaseflow::model::{
    builtin, divided_difference_lambda, regularize, validate_hypotheses, CheckStatus, ConvexPotential, LatentHeat,
    ModelSpec, NonconvexPotential, Order, Params, Potential, ScalarLaw,
};
use phaseflow::Error;

/// Deterministic midpoints on `[max(lo, c - 50), min(hi, c + 50)]`.
fn samples(p: &dyn Potential, center: f64, count: usize) -> Vec<f64> {
    let d = p.domain();
    let a = d.lo.max(center - 50.0);
    let b = d.hi.min(center + 50.0);
    (0..count)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
        .collect()
}

fn convex_catalog() -> Vec<ConvexPotential> {
    vec![
        ConvexPotential::caginalp(),
        ConvexPotential::mixed(1.0).unwrap(),
        ConvexPotential::mixed(0.5).unwrap(),
    ]
}

#[test]
fn convex_builtins_satisfy_sampled_invariants() {
    for j in convex_catalog() {
        for r in samples(&j, j.theta_inf, 1000) {
            let v = j.j(r).unwrap();
            let c = j.d2j(r).unwrap();
            assert!(v >= 0.0, "{}: j({r}) = {v}", j.name);
            assert!(c >= j.sigma - 1e-12, "{}: j''({r}) = {c} < sigma = {}", j.name, j.sigma);
        }
        assert!(j.j(j.theta_inf).unwrap() <= 1e-14);
        assert!(j.dj(j.theta_inf).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn pure_penrose_fife_loses_uniform_convexity() {
    // j'' = 1/(r + τc)² decays, so no σ > 0 bounds it from below.
    let j = ConvexPotential::penrose_fife(1.0, 0.5).unwrap();
    let samples = samples(&j, 0.0, 1000);
    let worst = samples.iter().map(|&r| j.d2j(r).unwrap()).fold(f64::INFINITY, f64::min);
    assert!(worst < 0.5);
    let spec = ModelSpec::new(j, NonconvexPotential::quartic(), LatentHeat::linear(1.0));
    let check = validate_hypotheses(&spec, 1000).check("hp_j1").cloned().unwrap();
    assert_eq!(check.status, CheckStatus::Fail);
    assert!(check.witness.unwrap() > 1.0);
}

#[test]
fn wells_satisfy_sampled_invariants() {
    for w in [
        NonconvexPotential::quartic(),
        NonconvexPotential::logarithmic(2.0).unwrap(),
    ] {
        assert!(w.core.compactly_inside(&w.domain) && w.core.contains(0.0), "{}", w.name);
        for r in samples(&w, 0.0, 1000) {
            assert!(w.w(r).unwrap() >= -1e-14, "{}: W({r})", w.name);
            assert!(w.d2w(r).unwrap() >= -w.kappa - 1e-12, "{}: W''({r})", w.name);
            if !w.core.contains_closed(r) {
                assert!(w.dw(r).unwrap() / r >= w.mu - 1e-12, "{}: W'({r})/{r}", w.name);
            }
        }
    }
}

#[test]
fn evaluate_examples() {
    let cag = ConvexPotential::caginalp();
    assert_eq!(cag.evaluate(Order::First, 0.0).unwrap(), 0.0);
    let quartic = NonconvexPotential::quartic();
    assert_eq!(quartic.evaluate(Order::First, 1.0).unwrap(), 0.0);
    assert_eq!(quartic.evaluate(Order::First, -1.0).unwrap(), 0.0);
    assert_eq!(quartic.evaluate(Order::Value, 0.0).unwrap(), 0.25);
    assert_eq!(quartic.kappa, 1.0);
    let pf = ConvexPotential::penrose_fife(1.0, 1.0).unwrap();
    assert!(pf.evaluate(Order::First, 0.0).unwrap().abs() < 1e-15);
    assert!(matches!(
        pf.evaluate(Order::Value, -1.0),
        Err(Error::DomainViolation { .. })
    ));
    assert!(Order::try_from(3).is_err());
}

#[test]
fn builtin_catalog() {
    let mut p = Params::new();
    p.insert("tau_c".into(), 1.0);
    let j = builtin("mixed_j", &p).unwrap().into_heat_flux().unwrap();
    assert_eq!(j.theta_inf, 0.0);
    assert!(j.j(0.0).unwrap().abs() < 1e-15);

    let mut p = Params::new();
    p.insert("ell".into(), 2.0);
    let l = builtin("linear_lambda", &p).unwrap().into_latent().unwrap();
    for r in [-3.0, 0.0, 5.0] {
        assert_eq!(l.d2(r), 0.0);
        assert_eq!(l.d1(r), 2.0);
    }
    assert!(matches!(
        builtin("cubic_W", &Params::new()),
        Err(Error::UnknownModel(_))
    ));
    assert!(matches!(builtin("quartic_W", &p), Err(Error::InvalidParameter(_))));
    assert!(builtin("quartic_W", &Params::new()).unwrap().into_heat_flux().is_err());
}

#[derive(Debug)]
struct Sine;

impl ScalarLaw for Sine {
    fn value(&self, r: f64) -> f64 {
        r.sin()
    }
    fn d1(&self, r: f64) -> f64 {
        r.cos()
    }
    fn d2(&self, r: f64) -> f64 {
        -r.sin()
    }
}

#[derive(Debug)]
struct Square;

impl ScalarLaw for Square {
    fn value(&self, r: f64) -> f64 {
        r * r
    }
    fn d1(&self, r: f64) -> f64 {
        2.0 * r
    }
    fn d2(&self, _r: f64) -> f64 {
        2.0
    }
}

#[test]
fn divided_difference_examples() {
    assert_eq!(divided_difference_lambda(&LatentHeat::linear(2.0), 0.0, 1.0), 2.0);
    let sq = LatentHeat::new("square", Arc::new(Square), 2.0);
    assert!((divided_difference_lambda(&sq, 1.0, 3.0) - 4.0).abs() < 1e-14);
    let sine = LatentHeat::new("sine", Arc::new(Sine), 1.0);
    assert!((divided_difference_lambda(&sine, 0.5, 0.5) - 0.5f64.cos()).abs() < 1e-15);
}

#[test]
fn divided_difference_converges_to_derivative() {
    for lambda in [LatentHeat::new("sine", Arc::new(Sine), 1.0), LatentHeat::tanh(1.5)] {
        for a in [-0.7, 0.3, 1.1] {
            let exact = lambda.d1(a);
            let errs: Vec<f64> = (2..=8)
                .map(|k| (divided_difference_lambda(&lambda, a, a + 10f64.powi(-k)) - exact).abs())
                .collect();
            // Monotone until the errors reach round-off level.
            for w in errs.windows(2) {
                assert!(w[1] <= w[0] || w[1] < 1e-9, "{}: a = {a}, errors {errs:?}", lambda.name);
            }
            assert!(errs[6] < 1e-7);
        }
    }
}

/// `q (r-c)² + min_y [φ(y) + (r - y)²/(2ρ)]` with `φ = f - q(·-c)²`, found
/// by a dense scan followed by golden-section refinement.
fn brute_force_envelope(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, q: f64, c: f64, rho: f64, r: f64) -> f64 {
    let g = |y: f64| f(y) - q * (y - c).powi(2) + (r - y).powi(2) / (2.0 * rho);
    let a0 = lo.max(r - 20.0);
    let b0 = hi.min(r + 20.0);
    let m = 40_000;
    let ys: Vec<f64> = (0..=m).map(|i| a0 + (b0 - a0) * i as f64 / m as f64).collect();
    let k = (0..=m).min_by(|&i, &j| g(ys[i]).total_cmp(&g(ys[j]))).unwrap();
    let (mut a, mut b) = (ys[k.saturating_sub(1)], ys[(k + 1).min(m)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if g(x1) < g(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    q * (r - c).powi(2) + g(0.5 * (a + b))
}

#[test]
fn quadratic_envelope_closed_form() {
    let j1 = regularize(&ConvexPotential::caginalp(), 1).unwrap();
    for r in [-3.0, -0.5, 0.0, 0.7, 4.0] {
        let expected = r * r * (0.25 + 1.0 / 6.0);
        assert!((j1.j(r).unwrap() - expected).abs() < 1e-12, "r = {r}");
    }
}

#[test]
fn envelope_matches_brute_force_prox() {
    let pf = ConvexPotential::mixed(1.0).unwrap();
    let lo = -1.0 + 1e-12;
    for n in [1, 4, 20] {
        let jn = regularize(&pf, n).unwrap();
        let f = |y: f64| pf.j(y).unwrap_or(f64::INFINITY);
        for r in [-3.0, -0.99, -0.5, 0.0, 0.8, 3.0] {
            let oracle = brute_force_envelope(&f, lo, f64::INFINITY, pf.sigma / 4.0, 0.0, 1.0 / n as f64, r);
            let ours = jn.j(r).unwrap();
            assert!((ours - oracle).abs() < 1e-8, "n = {n}, r = {r}: {ours} vs {oracle}");
        }
    }
    let w = NonconvexPotential::logarithmic(2.0).unwrap();
    for n in [1, 10] {
        let wn = regularize(&w, n).unwrap();
        let f = |y: f64| w.w(y).unwrap_or(f64::INFINITY);
        for r in [-2.0, -0.9, 0.0, 0.5, 1.5] {
            let oracle = brute_force_envelope(&f, -1.0 + 1e-12, 1.0 - 1e-12, -w.kappa / 2.0, 0.0, 1.0 / n as f64, r);
            let ours = wn.w(r).unwrap();
            assert!((ours - oracle).abs() < 1e-8, "W n = {n}, r = {r}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn regularized_heat_flux_stays_uniformly_convex() {
    for j in convex_catalog() {
        for n in [1, 10, 100] {
            let jn = regularize(&j, n).unwrap();
            for i in 0..=400 {
                let r = -20.0 + 40.0 * i as f64 / 400.0;
                let c = jn.d2j(r).unwrap();
                assert!(c >= j.sigma / 2.0 - 1e-10, "{} n = {n}: j_n''({r}) = {c}", j.name);
            }
        }
    }
}

#[test]
fn envelope_converges_in_the_interior() {
    type Pair = Box<dyn Fn(usize, f64) -> (f64, f64)>;
    let pots: Vec<Pair> = vec![
        Box::new(|n, r| {
            let j = ConvexPotential::mixed(1.0).unwrap();
            (regularize(&j, n).unwrap().j(r).unwrap(), j.j(r).unwrap())
        }),
        Box::new(|n, r| {
            let w = NonconvexPotential::logarithmic(2.0).unwrap();
            (regularize(&w, n).unwrap().w(r * 0.9).unwrap(), w.w(r * 0.9).unwrap())
        }),
        Box::new(|n, r| {
            let w = NonconvexPotential::quartic();
            (regularize(&w, n).unwrap().w(r).unwrap(), w.w(r).unwrap())
        }),
    ];
    for p in &pots {
        for n in [1, 10, 100, 1000] {
            for r in [-0.8, -0.3, 0.0, 0.4, 0.9] {
                let (reg, orig) = p(n, r);
                assert!(
                    (reg - orig).abs() <= 10.0 / n as f64,
                    "n = {n}, r = {r}: {reg} vs {orig}"
                );
                assert!(reg <= orig + 1e-12);
            }
        }
    }
}

#[test]
fn regularized_potentials_are_finite_everywhere() {
    let jn = regularize(&ConvexPotential::mixed(1.0).unwrap(), 5).unwrap();
    let wn = regularize(&NonconvexPotential::logarithmic(2.0).unwrap(), 5).unwrap();
    for r in [-100.0, -1.0, -1.5, 1.0, 7.0] {
        assert!(jn.j(r).unwrap().is_finite());
        assert!(wn.w(r).unwrap().is_finite());
    }
    assert!(regularize(&ConvexPotential::caginalp(), 0).is_err());
}

#[test]
fn hypothesis_reports() {
    let report = validate_hypotheses(&ModelSpec::caginalp_quartic(1.0), 1000);
    assert!(report.all_pass(), "{report:?}");
    let mixed = ModelSpec::new(
        ConvexPotential::mixed(1.0).unwrap(),
        NonconvexPotential::quartic(),
        LatentHeat::tanh(1.0),
    );
    let report = validate_hypotheses(&mixed, 1000);
    assert_eq!(report.check("hp_j1").unwrap().status, CheckStatus::Pass);
    assert_eq!(report, validate_hypotheses(&mixed, 1000));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivatives_match_finite_differences(r in -0.95f64..5.0, which in 0usize..4) {
        let p: Box<dyn Potential> = match which {
            0 => Box::new(ConvexPotential::caginalp()),
            1 => Box::new(ConvexPotential::mixed(1.0).unwrap()),
            2 => Box::new(NonconvexPotential::quartic()),
            _ => Box::new(NonconvexPotential::logarithmic(2.0).unwrap()),
        };
        let r = if which == 3 { r / 5.5 } else { r };
        let h = 1e-6;
        let d1 = p.evaluate(Order::First, r).unwrap();
        let fd1 = (p.evaluate(Order::Value, r + h).unwrap() - p.evaluate(Order::Value, r - h).unwrap()) / (2.0 * h);
        prop_assert!((d1 - fd1).abs() <= 1e-5 * (1.0 + d1.abs()));
        let d2 = p.evaluate(Order::Second, r).unwrap();
        let fd2 = (p.evaluate(Order::First, r + h).unwrap() - p.evaluate(Order::First, r - h).unwrap()) / (2.0 * h);
        prop_assert!((d2 - fd2).abs() <= 1e-5 * (1.0 + d2.abs()));
    }

    #[test]
    fn secant_is_symmetric_and_bounded(a in -3.0f64..3.0, b in -3.0f64..3.0, ell in 0.1f64..4.0) {
        let lambda = LatentHeat::tanh(ell);
        let s = divided_difference_lambda(&lambda, a, b);
        prop_assert_eq!(s, divided_difference_lambda(&lambda, b, a));
        // The secant of tanh scaled by ell lies between the extreme slopes.
        prop_assert!(s <= ell + 1e-12 && s >= 0.0);
    }
}
