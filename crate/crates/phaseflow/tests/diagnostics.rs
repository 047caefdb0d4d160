use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use phaseflow::diagnostics::{
    check_dissipation, detect_omega_limit, estimate_from_samples, fit_rate_series, monitor_bounds, phi_increases,
    phi_series, stability_gap, tail_test, EnergyTrace, OmegaThresholds, ScalarGradientFlow, TraceRow, Verdict,
    CSV_HEADER,
};
use phaseflow::dynamics::{run, Problem, SourceSpec, State, TrajectoryConfig};
use phaseflow::grid::{Field, Grid};
use phaseflow::model::ModelSpec;
use phaseflow::operators::BoundarySpec;
use phaseflow::steady::residual_stationary;
use phaseflow::Error;

fn synthetic(energies: &[f64]) -> EnergyTrace {
    let rows = energies
        .iter()
        .enumerate()
        .map(|(k, e)| TraceRow::from_csv_columns([k as f64 * 0.1, *e, 0.0, 0.0, 0.0, 0.0], 1))
        .collect();
    EnergyTrace::new(rows).unwrap()
}

fn line(n: usize) -> Arc<Grid> {
    Arc::new(Grid::line(1.0, n).unwrap())
}

fn caginalp(grid: &Arc<Grid>, chi0: f64, bc: BoundarySpec, cfg: &TrajectoryConfig) -> phaseflow::dynamics::Trajectory {
    let model = ModelSpec::caginalp_quartic(1.0);
    let problem = Problem::new(model.clone(), grid.clone(), bc, SourceSpec::zero()).unwrap();
    let init = State::new(
        0.0,
        Field::from_fn(grid.clone(), |_, _| 0.0),
        Field::from_fn(grid.clone(), |x, _| chi0 * (PI * x).cos()),
        &model,
    )
    .unwrap();
    run(&problem, init, cfg).unwrap()
}

fn cfg(dt: f64, t_end: f64) -> TrajectoryConfig {
    TrajectoryConfig {
        dt,
        t_end,
        ..TrajectoryConfig::default()
    }
}

#[test]
fn dissipation_detects_injected_uptick() {
    let mut e: Vec<f64> = (0..20).map(|k| 1.0 / (1.0 + k as f64)).collect();
    assert!(check_dissipation(&synthetic(&e), &[], 0.1, 1e-9).pass);
    e[12] = e[11] + 1e-3;
    let rep = check_dissipation(&synthetic(&e), &[], 0.1, 1e-9);
    assert!(!rep.pass);
    assert_eq!(rep.violations[0].index, 12);
    assert!((rep.violations[0].increase - 1e-3).abs() < 1e-12);
    // The same uptick is allowed once the source term covers it.
    let g = vec![0.03; 20];
    assert!(check_dissipation(&synthetic(&e), &g, 0.1, 1e-9).pass);
}

#[test]
fn trace_csv_roundtrip() {
    let traj = caginalp(&line(16), 0.2, BoundarySpec::DirichletTheta, &cfg(0.01, 0.5));
    let text = traj.trace.to_csv();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let back = EnergyTrace::parse_csv(&text).unwrap();
    assert_eq!(back.len(), traj.trace.len());
    for (a, b) in back.rows.iter().zip(&traj.trace.rows) {
        assert_eq!(
            (a.t, a.energy, a.norm_u_v, a.newton_iters),
            (b.t, b.energy, b.norm_u_v, b.newton_iters)
        );
        assert_eq!(
            (a.norm_chit_h, a.dist_theta_h, a.stationary_residual),
            (b.norm_chit_h, b.dist_theta_h, b.stationary_residual)
        );
    }
    assert_eq!(back.to_csv(), text);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    traj.trace.write_csv(&path).unwrap();
    assert_eq!(EnergyTrace::read_csv(&path).unwrap().to_csv(), text);

    let dup = vec![synthetic(&[1.0]).rows[0].clone(), synthetic(&[1.0]).rows[0].clone()];
    assert!(EnergyTrace::new(dup).is_err());
    assert!(matches!(
        EnergyTrace::parse_csv("t,energy\n1,2\n"),
        Err(Error::ParseError { .. })
    ));
}

#[test]
fn omega_limit_verdicts() {
    let grid = line(32);
    let model = ModelSpec::caginalp_quartic(1.0);
    let short = caginalp(&grid, 0.1, BoundarySpec::DirichletTheta, &cfg(1e-3, 0.1));
    assert_eq!(short.verdict.verdict, Verdict::Pending);

    let eq = caginalp(&grid, 0.0, BoundarySpec::DirichletTheta, &cfg(1e-2, 0.05));
    let v = detect_omega_limit(&eq.trace, &eq.final_state, &OmegaThresholds::default(), &model).unwrap();
    assert_eq!(v.verdict, Verdict::Converged);

    let mut long = cfg(1e-2, 60.0);
    long.stop_on_converged = true;
    let conv = caginalp(&grid, 0.1, BoundarySpec::DirichletTheta, &long);
    let v = detect_omega_limit(&conv.trace, &conv.final_state, &OmegaThresholds::default(), &model).unwrap();
    assert_eq!(v.verdict, Verdict::Converged);
    let chi = v.limit_chi.unwrap();
    assert!(residual_stationary(&chi, &model).unwrap() < 1e-6);
    assert!(model
        .w
        .critical_points
        .iter()
        .any(|r| chi.values().iter().all(|c| (c - r).abs() < 1e-4)));
}

#[test]
fn rate_fit_examples() {
    let t: Vec<f64> = (1..=200).map(|k| k as f64 * 0.5).collect();
    let power = |b: f64, c: f64| t.iter().map(|s| c * s.powf(-b)).collect::<Vec<_>>();
    let fit = fit_rate_series(&t, &power(2.0, 1.0), None, None).unwrap();
    assert!((fit.beta - 2.0).abs() < 1e-6);
    assert!(fit.points >= 10);

    let fit = fit_rate_series(&t, &power(0.5, 3.0), Some(0.25), None).unwrap();
    assert!(fit.consistency_gap.unwrap() < 1e-3);
    assert_eq!(fit.predicted, Some(0.5));

    let exp: Vec<f64> = t.iter().map(|s| (-s / 10.0).exp()).collect();
    let fit = fit_rate_series(&t, &exp, None, None).unwrap();
    assert!(fit.beta.is_infinite());
    assert!((fit.exponential_rate - 0.1).abs() < 1e-9);

    let flat = vec![1.0; t.len()];
    assert!(matches!(
        fit_rate_series(&t, &flat, None, None),
        Err(Error::InsufficientDecay(_))
    ));

    // A slow source tail caps the guaranteed exponent.
    let fit = fit_rate_series(&t, &power(0.5, 1.0), Some(0.25), Some(0.5)).unwrap();
    assert!((fit.zeta0.unwrap() - 1.0 / 6.0).abs() < 1e-12);
    assert!((fit.fallback_exponent.unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn lojasiewicz_scalar_families() {
    for (p, zeta) in [(2.0, 0.5), (3.0, 1.0 / 3.0), (4.0, 0.25)] {
        let flow = ScalarGradientFlow { a: 1.0, p };
        let path = flow.integrate(0.5, 50.0, 50_000);
        let samples: Vec<_> = flow.samples(&path).into_iter().step_by(500).collect();
        let fit = estimate_from_samples(&samples, 1.0).unwrap();
        assert!((fit.zeta - zeta).abs() < 0.03, "p = {p}: {}", fit.zeta);
        assert!(fit.zeta > 0.0 && fit.zeta <= 0.5);
        assert!(samples.iter().filter(|s| s.dist <= 1.0).count() >= fit.admitted);

        let far: Vec<_> = samples
            .iter()
            .map(|s| phaseflow::diagnostics::LojSample { dist: 2.0, ..*s })
            .collect();
        assert!(matches!(
            estimate_from_samples(&far, 1.0),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}

#[test]
fn monitor_examples() {
    let grid = line(32);
    let eq = caginalp(&grid, 0.0, BoundarySpec::DirichletTheta, &cfg(1e-2, 4.0));
    // χ ≡ 0 is the unstable equilibrium; only W'(0) = 0 matters here.
    let rep = monitor_bounds(&eq.trace, 1.0);
    assert!(rep.coverage_ok && rep.all_finite && rep.unbounded_trend.is_empty());
    assert_eq!(
        (rep.sup.thetat_l2, rep.sup.u_v, rep.sup.chit_h, rep.sup.wprime_h),
        (0.0, 0.0, 0.0, 0.0)
    );

    let mut trace = synthetic(&vec![1.0; 100]);
    for r in trace.rows.iter_mut() {
        r.norm_u_v = 1.0 + 3.0 * r.t;
        for v in [
            &mut r.thetat_sq_int,
            &mut r.norm_theta_v,
            &mut r.norm_chit_h,
            &mut r.norm_chi_h2,
            &mut r.norm_wprime_h,
        ] {
            *v = 0.5;
        }
    }
    let rep = monitor_bounds(&trace, 0.0);
    assert_eq!(rep.unbounded_trend, vec!["u_V".to_string()]);
}

#[test]
fn phi_is_monotone_without_source() {
    let mut c = cfg(1e-2, 3.0);
    c.trace_every = 1;
    c.newton_tol = 1e-10;
    let traj = caginalp(&line(48), 0.4, BoundarySpec::robin(0.5), &c);
    let e_inf = traj.trace.last().unwrap().energy_chi;
    let phi = phi_series(&traj.trace, e_inf);
    assert!(phi_increases(&phi, 10.0 * 1e-10).is_empty());
    assert!(phi.first().unwrap() > phi.last().unwrap());
}

#[test]
fn tail_test_on_power_source() {
    let delta = 1.0;
    let rows = (0..=2000)
        .map(|k| {
            let t = k as f64 * 0.01;
            let mut r = TraceRow::from_csv_columns([t, 0.0, 0.0, 0.0, 0.0, 0.0], 1);
            r.source_work = if k == 0 {
                0.0
            } else {
                0.01 * (1.0 + t).powf(-(2.0 + delta))
            };
            r
        })
        .collect();
    let trace = EnergyTrace::new(rows).unwrap();
    let rep = tail_test(&trace, delta, Some(true));
    assert!(rep.finite && rep.sup < 1.0);
}

#[test]
fn gap_examples() {
    let c = TrajectoryConfig {
        snapshot_every: 10,
        ..cfg(1e-2, 1.0)
    };
    let a = caginalp(&line(32), 0.1, BoundarySpec::DirichletTheta, &c);
    let b = caginalp(&line(32), 0.1, BoundarySpec::DirichletTheta, &c);
    assert!(stability_gap(&a, &b).unwrap().gaps.iter().all(|g| *g == 0.0));
    let p = caginalp(&line(32), 0.1 + 1e-6, BoundarySpec::DirichletTheta, &c);
    let gap = stability_gap(&a, &p).unwrap().at(1.0).unwrap();
    assert!(gap > 0.0 && gap <= 1e-3);
    let other = caginalp(&line(33), 0.1, BoundarySpec::DirichletTheta, &c);
    assert!(matches!(stability_gap(&a, &other), Err(Error::ConfigMismatch(_))));
}

proptest! {
    #[test]
    fn power_laws_recovered_for_any_constant(beta in 0.5f64..4.0, c in 1e-3f64..1e3) {
        let t: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        let d: Vec<f64> = t.iter().map(|s| c * s.powf(-beta)).collect();
        let fit = fit_rate_series(&t, &d, None, None).unwrap();
        prop_assert!((fit.beta - beta).abs() < 1e-6);
        prop_assert!(fit.c_star >= c * (1.0 - 1e-9));
    }
}
