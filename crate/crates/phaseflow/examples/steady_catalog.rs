//! Stationary states of the quartic well on intervals of growing length.
//! Transition layers appear once the interval is longer than π.

use std::sync::Arc;

use phaseflow::grid::{Field, Grid};
use phaseflow::model::ModelSpec;
use phaseflow::steady::catalog;

fn main() -> phaseflow::Result<()> {
    let model = ModelSpec::caginalp_quartic(1.0);
    for l in [1.0, 4.0, 10.0, 20.0] {
        let grid = Arc::new(Grid::line(l, 257)?);
        let mut guesses: Vec<Field> = [-1.0, 0.0, 1.0]
            .iter()
            .map(|&c| Field::constant(grid.clone(), c))
            .collect();
        for layers in 1..=3 {
            let k = layers as f64 * std::f64::consts::PI / l;
            guesses.push(Field::from_fn(grid.clone(), move |x, _| -(k * x).cos()));
        }
        let (states, failures) = catalog(&guesses, &model, 1e-10)?;
        println!(
            "L = {l}: {} distinct states, {} failed solves",
            states.len(),
            failures.len()
        );
        for s in &states {
            println!(
                "  range [{:+.4}, {:+.4}]  energy {:.6}  residual {:.1e}{}",
                s.range.0,
                s.range.1,
                s.energy,
                s.residual,
                if s.is_constant() { "  (constant)" } else { "" }
            );
        }
    }
    Ok(())
}
