use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use phaseflow::diagnostics::{check_dissipation, stability_gap};
use phaseflow::dynamics::{
    discrete_energy, oracle_step, run, Problem, SourceSpec, SourceTags, SpaceProfile, State, TrajectoryConfig,
};
use phaseflow::grid::{Field, Grid};
use phaseflow::model::{ConvexPotential, LatentHeat, ModelSpec, NonconvexPotential};
use phaseflow::operators::BoundarySpec;
use phaseflow::schedule::Envelope;
use phaseflow::Error;

fn line(n: usize) -> Arc<Grid> {
    Arc::new(Grid::line(1.0, n).unwrap())
}

fn mixed_model() -> ModelSpec {
    ModelSpec::new(
        ConvexPotential::mixed(1.0).unwrap(),
        NonconvexPotential::logarithmic(2.0).unwrap(),
        LatentHeat::tanh(1.0),
    )
}

fn state(grid: &Arc<Grid>, model: &ModelSpec, theta: impl Fn(f64) -> f64, chi: impl Fn(f64) -> f64) -> State {
    State::new(
        0.0,
        Field::from_fn(grid.clone(), |x, _| theta(x)),
        Field::from_fn(grid.clone(), |x, _| chi(x)),
        model,
    )
    .unwrap()
}

fn config(dt: f64, t_end: f64) -> TrajectoryConfig {
    TrajectoryConfig {
        dt,
        t_end,
        ..TrajectoryConfig::default()
    }
}

fn robin_forcing() -> (BoundarySpec, SourceSpec) {
    (
        BoundarySpec::RobinTheta {
            eta: 2.0,
            amplitude: 0.3,
            envelope: Envelope::Exponential { rate: 1.0 },
        },
        SourceSpec::separable(SpaceProfile::Cosine, 0.5, Envelope::Power { exponent: 2.0 }).with_tags(SourceTags {
            p: None,
            q: Some(2.0),
            delta: Some(1.0),
        }),
    )
}

#[test]
fn energy_examples() {
    let grid = line(101);
    let model = ModelSpec::caginalp_quartic(1.0);
    let e = |c: &dyn Fn(f64) -> f64| discrete_energy(&state(&grid, &model, |_| 0.0, c), &model, &grid).unwrap();
    assert_eq!(e(&|_| 1.0), 0.0);
    assert!((e(&|_| 0.0) - 0.25).abs() < 1e-15);
    // ½ + ∫(x² - 1)²/4 by composite Simpson on 2001 points.
    let m = 2000;
    let simpson: f64 = (0..=m)
        .map(|i| {
            let x = i as f64 / m as f64;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * (x * x - 1.0).powi(2) / 4.0
        })
        .sum::<f64>()
        / (3.0 * m as f64);
    assert!((simpson - (1.0 / 5.0 - 2.0 / 3.0 + 1.0) / 4.0).abs() < 1e-12);
    assert!((e(&|x| x) - (0.5 + simpson)).abs() < 1e-4);
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let grid = line(32);
    let model = ModelSpec::caginalp_quartic(1.0);
    let eq = State::uniform(&grid, 1.0, &model).unwrap();
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::DirichletTheta,
        SourceSpec::zero(),
    )
    .unwrap();
    let (next, rep) = problem.step(&eq, 0.1, 1e-10, 50).unwrap();
    assert_eq!(rep.newton_iters, 1);
    for (a, b) in next.chi().values().iter().zip(eq.chi().values()) {
        assert!((a - b).abs() < 1e-12);
    }
    let small = line(5);
    let eq5 = State::uniform(&small, -1.0, &model).unwrap();
    let o = oracle_step(
        &eq5,
        0.1,
        &model,
        &small,
        &BoundarySpec::robin(1.0),
        &SourceSpec::zero(),
        0,
    )
    .unwrap();
    assert!(o.chi().values().iter().all(|v| (v + 1.0).abs() < 1e-12));

    let traj = run(&problem, eq, &config(0.01, 1.0)).unwrap();
    let first = &traj.trace.rows[0];
    assert!(traj
        .trace
        .rows
        .iter()
        .all(|r| r.energy == first.energy && r.norm_u_v == 0.0));
}

#[test]
fn lyapunov_for_singular_laws() {
    let grid = line(64);
    let model = mixed_model();
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::robin(1.0),
        SourceSpec::zero(),
    )
    .unwrap();
    let init = state(&grid, &model, |x| 0.8 * (PI * x).cos(), |x| 0.9 * (3.0 * PI * x).cos());
    let traj = run(&problem, init, &config(5e-3, 2.0)).unwrap();
    let rep = check_dissipation(&traj.trace, &[], 5e-3, 10.0 * 1e-10);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn source_perturbed_dissipation_with_robin_data() {
    let grid = line(64);
    let model = mixed_model();
    let (bc, source) = robin_forcing();
    let problem = Problem::new(model.clone(), grid.clone(), bc, source).unwrap();
    let init = state(&grid, &model, |x| 0.2 * (PI * x).sin(), |x| 0.5 * (PI * x).cos());
    let traj = run(&problem, init, &config(2e-3, 2.0)).unwrap();
    let g: Vec<f64> = traj.trace.rows.iter().map(|r| r.g_dual_sq).collect();
    assert!(g.iter().skip(1).all(|v| *v > 0.0));
    let rep = check_dissipation(&traj.trace, &g, 2e-3, 10.0 * 1e-10);
    assert!(rep.pass, "{:?}", rep.violations.first());
}

#[test]
fn penrose_fife_positivity_under_large_steps() {
    let grid = line(48);
    let model = mixed_model();
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::robin(3.0),
        SourceSpec::zero(),
    )
    .unwrap();
    // Starts 1e-3 away from θ = -τc.
    let init = state(
        &grid,
        &model,
        |x| -0.4995 + 0.4995 * (PI * x).cos(),
        |x| 0.95 * (PI * x).cos(),
    );
    let mut c = config(0.05, 2.0);
    c.snapshot_every = 1;
    let traj = run(&problem, init, &c).unwrap();
    for f in &traj.fields {
        assert!(f.theta.iter().all(|t| *t > -1.0), "t = {}", f.t);
        assert!(f.chi.iter().all(|v| v.abs() < 1.0), "t = {}", f.t);
    }
    let s = &traj.final_state;
    for (u, th) in s.u().iter().zip(s.theta().values()) {
        assert!((u - model.j.dj(*th).unwrap()).abs() < 1e-14);
    }
}

#[test]
fn internal_energy_is_conserved_without_boundary_flux() {
    let grid = line(64);
    let model = ModelSpec::new(
        ConvexPotential::caginalp(),
        NonconvexPotential::quartic(),
        LatentHeat::tanh(2.0),
    );
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::robin(1e-14),
        SourceSpec::zero(),
    )
    .unwrap();
    let init = state(
        &grid,
        &model,
        |x| 0.3 * (2.0 * PI * x).cos(),
        |x| 0.4 + 0.5 * (PI * x).cos(),
    );
    let traj = run(&problem, init, &config(1e-2, 1.0)).unwrap();
    let drift = traj
        .trace
        .rows
        .windows(2)
        .map(|w| (w[1].internal_energy - w[0].internal_energy).abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-10, "{drift}");
}

#[test]
fn continuous_dependence_on_initial_data() {
    let grid = line(64);
    let model = mixed_model();
    let (bc, source) = robin_forcing();
    let problem = Problem::new(model.clone(), grid.clone(), bc, source).unwrap();
    let mut c = config(2e-3, 1.0);
    c.snapshot_every = 10;
    let run_with = |d: f64| {
        run(
            &problem,
            state(&grid, &model, |x| 0.2 * (PI * x).sin(), |x| (0.3 + d) * (PI * x).cos()),
            &c,
        )
        .unwrap()
    };
    let base = run_with(0.0);
    let gaps: Vec<f64> = [1e-4, 1e-6]
        .iter()
        .map(|&d| stability_gap(&base, &run_with(d)).unwrap().at(1.0).unwrap())
        .collect();
    let ratio = gaps[0] / gaps[1];
    assert!((50.0..=200.0).contains(&ratio), "{gaps:?}");
    assert_eq!(run_with(0.0).trace, base.trace);
}

#[test]
fn first_order_in_time() {
    let grid = line(33);
    let model = mixed_model();
    let (bc, source) = robin_forcing();
    let problem = Problem::new(model.clone(), grid.clone(), bc, source).unwrap();
    let finals: Vec<Vec<f64>> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let mut c = config(dt, 0.5);
            c.newton_tol = 1e-12;
            c.trace_every = 100;
            let init = state(&grid, &model, |x| 0.2 * (PI * x).sin(), |x| 0.3 * (PI * x).cos());
            let s = run(&problem, init, &c).unwrap().final_state;
            s.theta().values().iter().chain(s.chi().values()).cloned().collect()
        })
        .collect();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let order = (diff(&finals[0], &finals[1]) / diff(&finals[1], &finals[2])).log2();
    assert!((0.7..=1.3).contains(&order), "{order}");
}

#[test]
fn solver_failures_are_reported() {
    let grid = line(32);
    let model = mixed_model();
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::robin(1.0),
        SourceSpec::zero(),
    )
    .unwrap();
    let init = state(
        &grid,
        &model,
        |x| 0.9 * (3.0 * PI * x).cos(),
        |x| 0.9 * (4.0 * PI * x).cos(),
    );
    let err = problem.step(&init, 1e4, 1e-14, 2).unwrap_err();
    assert!(
        matches!(err, Error::NewtonDiverged { .. } | Error::DomainExhausted { .. }),
        "{err:?}"
    );

    let other = State::uniform(&line(16), 0.0, &model).unwrap();
    assert!(matches!(
        run(&problem, other, &config(1e-2, 0.1)),
        Err(Error::ConfigMismatch(_))
    ));
    let bad = TrajectoryConfig {
        dt: -1.0,
        ..TrajectoryConfig::default()
    };
    assert!(matches!(run(&problem, init, &bad), Err(Error::ValidationError(_))));
}

#[test]
fn stop_on_converged_ends_early() {
    let grid = line(32);
    let model = ModelSpec::caginalp_quartic(1.0);
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::DirichletTheta,
        SourceSpec::zero(),
    )
    .unwrap();
    let init = state(&grid, &model, |_| 0.0, |x| 0.9 + 0.05 * (PI * x).cos());
    let mut c = config(1e-2, 100.0);
    c.stop_on_converged = true;
    let traj = run(&problem, init, &c).unwrap();
    assert!(traj.final_state.t() < 100.0);
    assert_eq!(traj.verdict.verdict, phaseflow::diagnostics::Verdict::Converged);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_matches_oracle(
        n in 3usize..7,
        theta in proptest::collection::vec(-0.7f64..0.7, 6),
        chi in proptest::collection::vec(-0.95f64..0.95, 6),
        dt in 1e-3f64..0.2,
        law in 0usize..3,
        robin in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let grid = line(n);
        let model = match law {
            0 => ModelSpec::caginalp_quartic(1.0),
            1 => ModelSpec::new(ConvexPotential::mixed(1.0).unwrap(), NonconvexPotential::quartic(), LatentHeat::tanh(1.0)),
            _ => mixed_model(),
        };
        let (bc, source) = if robin { robin_forcing() } else { (BoundarySpec::DirichletTheta, SourceSpec::zero()) };
        let s = State::new(
            0.3,
            Field::new(grid.clone(), theta[..n].to_vec()).unwrap(),
            Field::new(grid.clone(), chi[..n].to_vec()).unwrap(),
            &model,
        ).unwrap();
        let problem = Problem::new(model.clone(), grid.clone(), bc.clone(), source.clone()).unwrap();
        let (ours, _) = problem.step(&s, dt, 1e-13, 60).unwrap();
        let oracle = oracle_step(&s, dt, &model, &grid, &bc, &source, seed).unwrap();
        for (a, b) in ours.theta().values().iter().zip(oracle.theta().values()) {
            prop_assert!((a - b).abs() < 1e-10, "theta {} vs {}", a, b);
            prop_assert!(*a > -1.0);
        }
        for (a, b) in ours.chi().values().iter().zip(oracle.chi().values()) {
            prop_assert!((a - b).abs() < 1e-10, "chi {} vs {}", a, b);
        }
    }
}
