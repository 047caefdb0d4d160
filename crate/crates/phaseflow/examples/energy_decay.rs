//! A Caginalp run with the quartic well: the energy decreases step by step
//! and the trajectory settles on a stationary state.

use std::f64::consts::PI;
use std::sync::Arc;

use phaseflow::diagnostics::{check_trace_dissipation, monitor_bounds};
use phaseflow::dynamics::{run, Problem, SourceSpec, State, TrajectoryConfig};
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
    let initial = State::new(
        0.0,
        Field::from_fn(grid.clone(), |x, _| 0.1 * (PI * x).sin()),
        Field::from_fn(grid.clone(), |x, _| 0.1 * (PI * x).cos()),
        &model,
    )?;
    let config = TrajectoryConfig {
        dt: 1e-2,
        t_end: 40.0,
        trace_every: 100,
        stop_on_converged: true,
        ..TrajectoryConfig::default()
    };
    let traj = run(&problem, initial, &config)?;

    println!("{:>8} {:>14} {:>12} {:>12}", "t", "energy", "|chi_t|_H", "residual");
    for r in &traj.trace.rows {
        println!(
            "{:>8.2} {:>14.10} {:>12.3e} {:>12.3e}",
            r.t, r.energy, r.norm_chit_h, r.stationary_residual
        );
    }
    let diss = check_trace_dissipation(&traj.trace, 1e-9);
    println!(
        "\ndissipation: pass = {}, worst margin {:.3e}",
        diss.pass, diss.worst_margin
    );
    println!("verdict: {:?} at t = {}", traj.verdict.verdict, traj.verdict.t);
    let chi = traj.final_state.chi();
    println!("limit χ in [{:.6}, {:.6}]", chi.min(), chi.max());
    let mon = monitor_bounds(&traj.trace, 1.0);
    println!(
        "sup ‖u‖_V over t ≥ 1: {:.3e}; growing norms: {:?}",
        mon.sup.u_v, mon.unbounded_trend
    );
    Ok(())
}
