//! Łojasiewicz exponents and decay rates: exact scalar flows, then a field
//! trajectory relaxing to a stationary state.

use std::f64::consts::PI;
use std::sync::Arc;

use phaseflow::diagnostics::{estimate_from_samples, estimate_lojasiewicz, fit_rate, ScalarGradientFlow};
use phaseflow::dynamics::{run, Problem, SourceSpec, State, TrajectoryConfig};
use phaseflow::grid::{Field, Grid};
use phaseflow::model::ModelSpec;
use phaseflow::operators::BoundarySpec;
use phaseflow::steady::solve_stationary;

fn main() -> phaseflow::Result<()> {
    for p in [2.0, 3.0, 4.0] {
        let flow = ScalarGradientFlow { a: 1.0, p };
        let samples: Vec<_> = flow
            .samples(&flow.integrate(0.5, 50.0, 50_000))
            .into_iter()
            .step_by(500)
            .collect();
        let fit = estimate_from_samples(&samples, 1.0)?;
        println!("E = |v|^{p}: ζ = {:.4} (exact {:.4})", fit.zeta, 1.0 / p);
    }

    let grid = Arc::new(Grid::line(1.0, 64)?);
    let model = ModelSpec::caginalp_quartic(1.0);
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::robin(1.0),
        SourceSpec::zero(),
    )?;
    let initial = State::new(
        0.0,
        Field::from_fn(grid.clone(), |_, _| 0.0),
        Field::from_fn(grid.clone(), |x, _| 0.7 + 0.2 * (PI * x).cos()),
        &model,
    )?;
    let config = TrajectoryConfig {
        dt: 1e-2,
        t_end: 15.0,
        trace_every: 50,
        snapshot_every: 10,
        ..TrajectoryConfig::default()
    };
    let traj = run(&problem, initial, &config)?;
    let steady = solve_stationary(traj.final_state.chi(), &model, 1e-12)?;
    let loj = estimate_lojasiewicz(&traj, &steady.chi, &model, 0.1)?;
    let rate = fit_rate(&traj, &steady.chi, Some(loj.zeta))?;
    println!("\nfield run: ζ = {:.4} from {} samples", loj.zeta, loj.admitted);
    if rate.beta.is_infinite() {
        println!("decay is exponential with rate {:.4}", rate.exponential_rate);
    } else {
        println!("decay exponent β = {:.4}", rate.beta);
    }
    Ok(())
}
