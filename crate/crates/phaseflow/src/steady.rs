//! Stationary solutions of `-Δχ + W'(χ) = 0` with `∂_n χ = 0`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::BandMatrix;
use crate::model::{ModelSpec, NonconvexPotential, Potential};
use crate::norms::{h_norm, DualPivot};
use crate::operators::DiscreteOperator;
use crate::snapshot::Snapshot;

/// Iterates are kept at least this far inside the domain of `W`.
pub(crate) const DOMAIN_MARGIN: f64 = 1e-8;

/// A certified solution of the stationary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub chi: Field,
    /// Neumann-pivot dual norm of `Aχ + W'(χ)`.
    pub residual: f64,
    /// Observed `[min χ, max χ]`.
    pub range: (f64, f64),
    /// Confinement interval `I1` the range is checked against.
    pub confinement: (f64, f64),
    /// `E(χ) = ½∫|∇χ|² + ∫W(χ)`.
    pub energy: f64,
    pub newton_iters: usize,
}

impl SteadyState {
    pub fn is_constant(&self) -> bool {
        self.range.1 - self.range.0 < 1e-10
    }
}

/// `A` and the Neumann dual pivot on one grid, assembled once.
#[derive(Debug, Clone)]
pub struct StationaryOperator {
    grid: Arc<Grid>,
    a: DiscreteOperator,
    pivot: DualPivot,
}

impl StationaryOperator {
    pub fn new(grid: &Arc<Grid>) -> Result<Self> {
        Ok(StationaryOperator {
            grid: Arc::clone(grid),
            a: DiscreteOperator::a(grid),
            pivot: DualPivot::neumann(grid)?,
        })
    }

    pub fn a(&self) -> &DiscreteOperator {
        &self.a
    }

    /// Nodal values of `Aχ + W'(χ)` (strong form).
    pub fn map(&self, w: &NonconvexPotential, chi: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.a.apply(chi);
        for (fi, &c) in f.iter_mut().zip(chi) {
            *fi += w.dw(c)?;
        }
        Ok(f)
    }

    /// `‖Aχ + W'(χ)‖_{V*}`.
    pub fn residual(&self, w: &NonconvexPotential, chi: &[f64]) -> Result<f64> {
        Ok(self.pivot.norm(&self.map(w, chi)?))
    }

    /// `E(χ) = ½ χᵀ K_A χ + Σ w_i W(χ_i)`.
    pub fn energy(&self, w: &NonconvexPotential, chi: &[f64]) -> Result<f64> {
        let mut e = 0.5 * self.a.form(chi, chi);
        for (wt, &c) in self.a.weights().iter().zip(chi) {
            e += wt * w.w(c)?;
        }
        Ok(e)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
}

/// `‖Aχ + W'(χ)‖_{V*}` with the Neumann pivot `-Δ_N + I`.
pub fn residual_stationary(chi: &Field, model: &ModelSpec) -> Result<f64> {
    StationaryOperator::new(chi.grid())?.residual(&model.w, chi.values())
}

/// `E(χ)` of a field.
pub fn stationary_energy(chi: &Field, model: &ModelSpec) -> Result<f64> {
    StationaryOperator::new(chi.grid())?.energy(&model.w, chi.values())
}

/// Damped Newton for `Aχ + W'(χ) = 0` started from `guess`.
///
/// Steps are shortened so that iterates stay inside `I`, then halved while
/// the residual does not decrease. A singular linearization `A + W''(χ)` is
/// reported as [`Error::DegenerateJacobian`].
pub fn solve_stationary(guess: &Field, model: &ModelSpec, tol: f64) -> Result<SteadyState> {
    solve_with(&StationaryOperator::new(guess.grid())?, guess, model, tol, 100)
}

pub fn solve_with(
    op: &StationaryOperator,
    guess: &Field,
    model: &ModelSpec,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let w = &model.w;
    let dom = w.domain();
    let grid = op.grid();
    let n = grid.len();
    let k = op.a().stiffness();
    let bw = k.bandwidth();
    let weights = op.a().weights().to_vec();

    let mut chi = guess.values().to_vec();
    let mut f = op.map(w, &chi)?;
    let mut res = op.pivot.norm(&f);
    let mut iters = 1;
    let mut jac = BandMatrix::zeros(n, bw, bw);
    while res > tol {
        if iters >= max_iter || !res.is_finite() {
            return Err(Error::NewtonDiverged {
                iterations: iters,
                residual: res,
            });
        }
        jac.clear();
        for i in 0..n {
            for (c, v) in k.row(i) {
                jac.add(i, c, v / weights[i]);
            }
            jac.add(i, i, w.law().d2(chi[i]));
        }
        let lu = jac.clone().factor()?;
        let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut delta);

        let mut alpha = 1.0;
        let admissible = |a: f64| {
            chi.iter()
                .zip(&delta)
                .all(|(c, d)| dom.distance_to_boundary(c + a * d) >= DOMAIN_MARGIN)
        };
        let mut halvings = 0;
        while !admissible(alpha) {
            alpha *= 0.5;
            halvings += 1;
            if halvings > 30 {
                return Err(Error::DomainExhausted { halvings });
            }
        }
        let trial = |a: f64| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let c: Vec<f64> = chi.iter().zip(&delta).map(|(c, d)| c + a * d).collect();
            let f = op.map(w, &c)?;
            let r = op.pivot.norm(&f);
            Ok((c, f, r))
        };
        let mut next = trial(alpha)?;
        let mut a = alpha;
        for _ in 0..20 {
            if next.2 < res {
                break;
            }
            a *= 0.5;
            let cand = trial(a)?;
            if cand.2 < next.2 {
                next = cand;
            }
        }
        (chi, f, res) = next;
        iters += 1;
    }

    let chi = Field::new(Arc::clone(grid), chi)?;
    let range = (chi.min(), chi.max());
    Ok(SteadyState {
        residual: res,
        range,
        confinement: w.confinement_interval(),
        energy: op.energy(w, chi.values())?,
        newton_iters: iters,
        chi,
    })
}

/// Outcome of [`check_range`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeReport {
    pub inside: bool,
    pub interval: (f64, f64),
    /// Node value farthest outside (or closest to leaving) the interval.
    pub worst_value: f64,
    pub worst_index: usize,
}

/// Whether every nodal value of `χ∞` lies in the closed interval `i1`.
pub fn check_range(state: &SteadyState, i1: (f64, f64)) -> RangeReport {
    let (lo, hi) = i1;
    let mut worst = (f64::NEG_INFINITY, 0usize, 0.0);
    for (i, &v) in state.chi.values().iter().enumerate() {
        let excess = (lo - v).max(v - hi);
        if excess > worst.0 {
            worst = (excess, i, v);
        }
    }
    RangeReport {
        inside: worst.0 <= 0.0,
        interval: i1,
        worst_value: worst.2,
        worst_index: worst.1,
    }
}

/// Solves from every guess and keeps the distinct solutions (H-distance
/// above `1e-6`), in order of first appearance. Failed solves are skipped
/// and returned separately.
pub fn catalog(guesses: &[Field], model: &ModelSpec, tol: f64) -> Result<(Vec<SteadyState>, Vec<(usize, Error)>)> {
    let Some(first) = guesses.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let op = StationaryOperator::new(first.grid())?;
    let weights = first.grid().weights();
    let mut found: Vec<SteadyState> = Vec::new();
    let mut failures = Vec::new();
    for (k, g) in guesses.iter().enumerate() {
        match solve_with(&op, g, model, tol, 100) {
            Ok(s) => {
                let dup = found
                    .iter()
                    .any(|f| h_norm(&weights, s.chi.sub(&f.chi).values()) < 1e-6);
                if !dup {
                    found.push(s);
                }
            }
            Err(e) => failures.push((k, e)),
        }
    }
    Ok((found, failures))
}

/// Writes `steady_<k>.pfld` for each state and `steady_catalog.csv`,
/// returning every path written (the CSV last).
pub fn write_catalog(dir: &Path, states: &[SteadyState]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("index,residual,energy,min,max,constant_flag\n");
    let mut paths = Vec::new();
    for (k, s) in states.iter().enumerate() {
        let p = dir.join(format!("steady_{k}.pfld"));
        Snapshot::new(&s.chi, 0.0).write(&p)?;
        paths.push(p);
        writeln!(
            csv,
            "{k},{:e},{},{},{},{}",
            s.residual,
            s.energy,
            s.range.0,
            s.range.1,
            s.is_constant()
        )
        .unwrap();
    }
    let p = dir.join("steady_catalog.csv");
    fs::write(&p, csv)?;
    paths.push(p);
    Ok(paths)
}
