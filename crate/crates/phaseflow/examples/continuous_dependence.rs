//! Two runs from nearby initial data stay close, and the gap scales with
//! the size of the perturbation.

use std::f64::consts::PI;
use std::sync::Arc;

use phaseflow::diagnostics::stability_gap;
use phaseflow::dynamics::{run, Problem, SourceSpec, State, Trajectory, TrajectoryConfig};
use phaseflow::grid::{Field, Grid};
use phaseflow::model::ModelSpec;
use phaseflow::operators::BoundarySpec;

fn main() -> phaseflow::Result<()> {
    let grid = Arc::new(Grid::line(1.0, 64)?);
    let model = ModelSpec::caginalp_quartic(1.0);
    let problem = Problem::new(
        model.clone(),
        grid.clone(),
        BoundarySpec::DirichletTheta,
        SourceSpec::zero(),
    )?;
    let config = TrajectoryConfig {
        dt: 1e-3,
        t_end: 2.0,
        snapshot_every: 100,
        ..TrajectoryConfig::default()
    };
    let start = |shift: f64| -> phaseflow::Result<Trajectory> {
        let s = State::new(
            0.0,
            Field::from_fn(grid.clone(), |x, _| 0.1 * (PI * x).sin()),
            Field::from_fn(grid.clone(), |x, _| (0.1 + shift) * (PI * x).cos()),
            &model,
        )?;
        run(&problem, s, &config)
    };
    let base = start(0.0)?;
    for delta in [1e-2, 1e-4, 1e-6] {
        let gap = stability_gap(&base, &start(delta)?)?;
        println!(
            "δ = {delta:.0e}: sup gap on [0, 1] {:.3e}, on [0, 2] {:.3e}",
            gap.at(1.0).unwrap_or(f64::NAN),
            gap.at(2.0).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
