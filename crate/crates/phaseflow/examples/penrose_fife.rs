//! A singular heat-flux law: the temperature must stay above -τc. The
//! stepper keeps every iterate inside the domain even with large steps.

use std::f64::consts::PI;
use std::sync::Arc;

use phaseflow::dynamics::{run, Problem, SourceSpec, State, TrajectoryConfig};
use phaseflow::grid::{Field, Grid};
use phaseflow::model::{ConvexPotential, LatentHeat, ModelSpec, NonconvexPotential};
use phaseflow::operators::BoundarySpec;

fn main() -> phaseflow::Result<()> {
    let tau_c = 1.0;
    let model = ModelSpec::new(
        ConvexPotential::mixed(tau_c)?,
        NonconvexPotential::logarithmic(2.0)?,
        LatentHeat::tanh(1.0),
    );
    let grid = Arc::new(Grid::line(1.0, 64)?);
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::robin(1.0),
        SourceSpec::zero(),
    )?;
    // The initial temperature comes within 0.01 of -τc at x = 1.
    let initial = State::new(
        0.0,
        Field::from_fn(grid.clone(), |x, _| -0.495 + 0.495 * (PI * x).cos()),
        Field::from_fn(grid.clone(), |x, _| 0.9 * (PI * x).cos()),
        &model,
    )?;

    for dt in [1e-3, 1e-2, 1e-1] {
        let config = TrajectoryConfig {
            dt,
            t_end: 2.0,
            snapshot_every: 1,
            ..TrajectoryConfig::default()
        };
        let traj = run(&problem, initial.clone(), &config)?;
        let min_theta = traj
            .fields
            .iter()
            .skip(1)
            .flat_map(|f| f.theta.iter().copied())
            .fold(f64::INFINITY, f64::min);
        let iters: usize = traj.trace.rows.iter().map(|r| r.newton_iters).sum();
        println!(
            "dt = {dt:<6} min θ + τc after t = 0: {:.4}  max |χ| = {:.4}  Newton iterations {iters}",
            min_theta + tau_c,
            traj.fields
                .iter()
                .flat_map(|f| f.chi.iter().map(|v| v.abs()))
                .fold(0.0, f64::max),
        );
    }
    Ok(())
}
