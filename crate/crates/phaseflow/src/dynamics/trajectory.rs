use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::{detect_omega_limit, EnergyTrace, OmegaThresholds, OmegaVerdict, TraceRow};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::norms::{h_norm, v_norm};

use super::scheme::Problem;
use super::state::State;

/// Time-stepping parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    /// Horizon `T`.
    pub t_end: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Emit a trace row every this many steps (and after the last step).
    pub trace_every: usize,
    /// Keep the fields every this many steps; 0 keeps only the first and
    /// last state.
    pub snapshot_every: usize,
    /// Stop as soon as the ω-limit rule fires.
    pub stop_on_converged: bool,
    pub omega: OmegaThresholds,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            dt: 1e-3,
            t_end: 1.0,
            newton_tol: 1e-10,
            max_newton: 50,
            trace_every: 1,
            snapshot_every: 0,
            stop_on_converged: false,
            omega: OmegaThresholds::default(),
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            errs.push(format!("run.dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            errs.push(format!("run.t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.newton_tol > 0.0) {
            errs.push(format!("run.newton_tol must be positive, got {}", self.newton_tol));
        }
        if self.max_newton < 2 {
            errs.push("run.max_newton must be at least 2".into());
        }
        if self.trace_every == 0 {
            errs.push("run.trace_every must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ValidationError(errs))
        }
    }

    /// Number of steps to reach the horizon.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Fields kept from a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredFields {
    pub step: usize,
    pub t: f64,
    pub theta: Vec<f64>,
    pub chi: Vec<f64>,
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Arc<Grid>,
    pub config: TrajectoryConfig,
    pub trace: EnergyTrace,
    pub fields: Vec<StoredFields>,
    pub final_state: State,
    pub steps: usize,
    /// Steps that had to be redone as two half steps.
    pub retries: usize,
    pub damping_events: usize,
    pub verdict: OmegaVerdict,
}

impl Trajectory {
    /// `χ` of the stored fields as [`Field`]s with their times.
    pub fn chi_series(&self) -> Vec<(f64, Field)> {
        self.fields
            .iter()
            .map(|s| {
                (
                    s.t,
                    Field::new(Arc::clone(&self.grid), s.chi.clone()).expect("stored field"),
                )
            })
            .collect()
    }
}

/// Builds a trace row for `state`. `prev` is the state one step earlier.
fn make_row(
    p: &Problem,
    state: &State,
    prev: Option<&State>,
    step: usize,
    newton_iters: usize,
    source_work: f64,
    thetat_sq_int: f64,
) -> Result<TraceRow> {
    let grid = p.grid();
    let w = p.weights();
    let m = p.model();
    let theta = state.theta().values();
    let chi = state.chi().values();
    let (energy_chi, energy_theta) = p.energy_parts(theta, chi)?;
    let (theta_t, chi_t, dt) = match prev {
        Some(q) => {
            let dt = state.t() - q.t();
            let tt: Vec<f64> = theta
                .iter()
                .zip(q.theta().values())
                .map(|(a, b)| (a - b) / dt)
                .collect();
            let ct: Vec<f64> = chi.iter().zip(q.chi().values()).map(|(a, b)| (a - b) / dt).collect();
            (tt, ct, dt)
        }
        None => {
            let (tt, ct) = p.rates(state)?;
            (tt, ct, 0.0)
        }
    };
    let dist: Vec<f64> = theta.iter().map(|v| v - m.theta_inf()).collect();
    let ac = p.a().apply(chi);
    let wp = chi.iter().map(|&c| m.w.dw(c)).collect::<Result<Vec<_>>>()?;
    Ok(TraceRow {
        t: state.t(),
        energy: energy_chi + energy_theta,
        norm_u_v: v_norm(grid, state.u()),
        norm_chit_h: h_norm(w, &chi_t),
        dist_theta_h: h_norm(w, &dist),
        stationary_residual: p.stationary().residual(&m.w, chi)?,
        newton_iters,
        step,
        dt,
        energy_chi,
        energy_theta,
        g_dual_sq: p.g_dual_sq(state.t())?,
        source_work,
        thetat_sq_int,
        norm_thetat_h: h_norm(w, &theta_t),
        norm_theta_v: v_norm(grid, theta),
        norm_chi_h2: h_norm(w, &ac) + v_norm(grid, chi),
        norm_wprime_h: h_norm(w, &wp),
        internal_energy: w.iter().zip(state.e()).map(|(a, b)| a * b).sum(),
    })
}

fn store(state: &State, step: usize) -> StoredFields {
    StoredFields {
        step,
        t: state.t(),
        theta: state.theta().values().to_vec(),
        chi: state.chi().values().to_vec(),
    }
}

/// Steps `initial` to the horizon, or until the ω-limit rule fires when
/// `stop_on_converged` is set.
///
/// A step whose Newton solve diverges is retried once as two half steps;
/// if that fails too the error is returned.
pub fn run(problem: &Problem, initial: State, config: &TrajectoryConfig) -> Result<Trajectory> {
    config.validate()?;
    if initial.grid() != problem.grid() {
        return Err(Error::ConfigMismatch(
            "initial state and problem use different grids".into(),
        ));
    }
    let e0 = problem.energy(&initial)?;
    if !e0.is_finite() {
        return Err(Error::InvalidParameter(format!("initial energy is not finite ({e0})")));
    }
    let m = problem.model();
    let n_steps = config.steps();
    let t0 = initial.t();

    let mut rows = vec![make_row(problem, &initial, None, 0, 0, 0.0, 0.0)?];
    let mut fields = vec![store(&initial, 0)];
    let mut passing = usize::from(config.omega.row_passes(&rows[0]));
    let (mut source_work, mut thetat_int, mut iters_since_row) = (0.0, 0.0, 0usize);
    let (mut retries, mut damping_events) = (0, 0);
    let mut state = initial;
    let mut prev = state.clone();
    let mut steps = 0;

    for k in 1..=n_steps {
        let t_next = t0 + k as f64 * config.dt;
        let dt = t_next - state.t();
        let mut substeps = Vec::with_capacity(2);
        match problem.step(&state, dt, config.newton_tol, config.max_newton) {
            Ok(r) => substeps.push(r),
            Err(Error::NewtonDiverged { .. }) => {
                retries += 1;
                let half = problem.step(&state, 0.5 * dt, config.newton_tol, config.max_newton)?;
                let rest = problem.step(&half.0, t_next - half.0.t(), config.newton_tol, config.max_newton)?;
                substeps.push(half);
                substeps.push(rest);
            }
            Err(e) => return Err(e),
        }
        prev = state;
        let mut from = prev.clone();
        for (s, rep) in &substeps {
            source_work += rep.dt * problem.g_dual_sq(s.t())?;
            let tt: Vec<f64> = s
                .theta()
                .values()
                .iter()
                .zip(from.theta().values())
                .map(|(a, b)| (a - b) / rep.dt)
                .collect();
            thetat_int += rep.dt * h_norm(problem.weights(), &tt).powi(2);
            iters_since_row += rep.newton_iters;
            damping_events += rep.damping_events;
            from = s.clone();
        }
        state = substeps.pop().unwrap().0;
        steps = k;

        if k % config.trace_every == 0 || k == n_steps {
            let row = make_row(
                problem,
                &state,
                Some(&prev),
                k,
                iters_since_row,
                source_work,
                thetat_int,
            )?;
            passing = if config.omega.row_passes(&row) { passing + 1 } else { 0 };
            rows.push(row);
            source_work = 0.0;
            thetat_int = 0.0;
            iters_since_row = 0;
        }
        if config.snapshot_every > 0 && k % config.snapshot_every == 0 && k != n_steps {
            fields.push(store(&state, k));
        }
        if config.stop_on_converged && passing >= config.omega.consecutive {
            break;
        }
    }
    if rows.last().map(|r| r.step) != Some(steps) {
        rows.push(make_row(
            problem,
            &state,
            Some(&prev),
            steps,
            iters_since_row,
            source_work,
            thetat_int,
        )?);
    }
    if steps > 0 {
        fields.push(store(&state, steps));
    }
    let trace = EnergyTrace::new(rows)?;
    let verdict = detect_omega_limit(&trace, &state, &config.omega, m)?;
    Ok(Trajectory {
        grid: Arc::clone(problem.grid()),
        config: config.clone(),
        trace,
        fields,
        final_state: state,
        steps,
        retries,
        damping_events,
        verdict,
    })
}
