//! Discrete Laplacians under the three boundary conditions and the norms
//! built from them.

use std::f64::consts::PI;
use std::sync::Arc;

use phaseflow::grid::{integrate, Field, Grid};
use phaseflow::norms::{norm, NormKind};
use phaseflow::operators::{BoundarySpec, DiscreteOperator, OperatorKind};

fn main() -> phaseflow::Result<()> {
    println!("second-order consistency of A on cos(πx):");
    let mut prev = None;
    for n in [17, 33, 65, 129] {
        let grid = Arc::new(Grid::line(1.0, n)?);
        let u = Field::from_fn(grid.clone(), |x, _| (PI * x).cos());
        let err = DiscreteOperator::a(&grid)
            .apply(u.values())
            .iter()
            .zip(u.values())
            .map(|(a, v)| (a - PI * PI * v).abs())
            .fold(0.0, f64::max);
        let ratio = prev.map_or(String::new(), |p: f64| format!("  ratio {:.2}", p / err));
        println!("  N = {n:>4}: max error {err:.3e}{ratio}");
        prev = Some(err);
    }

    let grid = Arc::new(Grid::rect(1.0, 2.0, 21, 41)?);
    let u = Field::from_fn(grid.clone(), |x, y| x * x + (PI * y).sin());
    let robin = BoundarySpec::robin(2.0);
    let r = DiscreteOperator::assemble(&grid, &robin, OperatorKind::R)?;
    let b = DiscreteOperator::b(&grid, &BoundarySpec::DirichletTheta)?;
    println!(
        "\n2-D grid {:?}, ∫u = {:.6}",
        grid.nodes(),
        integrate(&grid, u.values())
    );
    println!("  Robin form (u, u)_R = {:.6}", r.form(u.values(), u.values()));
    println!(
        "  Dirichlet nodes fixed by B: {}",
        (0..grid.len()).filter(|&i| b.is_fixed(i)).count()
    );
    for kind in [NormKind::H, NormKind::V, NormKind::Vstar, NormKind::C0] {
        println!("  {kind:?} norm = {:.6}", norm(&grid, u.values(), kind, &robin)?);
    }
    Ok(())
}
