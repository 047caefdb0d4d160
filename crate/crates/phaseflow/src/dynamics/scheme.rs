//! The time-discrete system and its Newton solver.
//!
//! One step from `(θ, χ)` to `(θ⁺, χ⁺)` solves, nodewise,
//!
//! ```text
//! (θ⁺ - θ)/Δt + λ̂ (χ⁺ - χ)/Δt + M⁻¹K_B j'(θ⁺)                 = g(t + Δt)
//! (χ⁺ - χ)/Δt + M⁻¹K_A χ⁺ + W'(χ⁺) + κχ⁺ - κχ - λ̂ j'(θ⁺)     = 0
//! ```
//!
//! with `λ̂ = λ̂(χ, χ⁺)` the secant of `λ`. Testing the first line with
//! `Δt·M j'(θ⁺)` and the second with `M(χ⁺ - χ)` makes the coupling terms
//! cancel exactly; convexity of `j` and of `W + κr²/2` then gives
//!
//! ```text
//! ℰ⁺ - ℰ ≤ Δt ℓᵀu⁺ - Δt u⁺ᵀK_B u⁺ - Δt‖(χ⁺-χ)/Δt‖²  ≤ ½Δt ‖ℓ‖²_{K_B⁻¹}
//! ```
//!
//! where `ℓ` is the load vector of `g`. On Dirichlet boundary nodes the heat
//! row is replaced by `θ⁺ = θ∞`, so `u⁺ = 0` there.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::linalg::BandMatrix;
use crate::model::{ModelSpec, Potential};
use crate::norms::h_norm;
use crate::operators::{BoundarySpec, DiscreteOperator};
use crate::steady::{StationaryOperator, DOMAIN_MARGIN};

use super::source::SourceSpec;
use super::state::State;

/// Damping gives up after this many halvings.
pub const MAX_HALVINGS: usize = 30;

/// What one accepted step cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    /// Residual evaluations, including the initial one.
    pub newton_iters: usize,
    /// Final residual: max over both equations of the H-norm.
    pub residual: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Newton updates that had to be shortened to stay in the domain.
    pub damping_events: usize,
    pub dt: f64,
}

/// Model, grid, boundary data and source with their operators assembled.
#[derive(Debug, Clone)]
pub struct Problem {
    model: ModelSpec,
    grid: Arc<Grid>,
    bc: BoundarySpec,
    source: SourceSpec,
    a: DiscreteOperator,
    b: DiscreteOperator,
    stationary: StationaryOperator,
    weights: Vec<f64>,
}

impl Problem {
    pub fn new(model: ModelSpec, grid: Arc<Grid>, bc: BoundarySpec, source: SourceSpec) -> Result<Self> {
        bc.validate()?;
        source.validate()?;
        let a = DiscreteOperator::a(&grid);
        let b = DiscreteOperator::b(&grid, &bc)?;
        let stationary = StationaryOperator::new(&grid)?;
        let weights = grid.weights();
        Ok(Problem {
            model,
            grid,
            bc,
            source,
            a,
            b,
            stationary,
            weights,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn bc(&self) -> &BoundarySpec {
        &self.bc
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }

    pub fn a(&self) -> &DiscreteOperator {
        &self.a
    }

    pub fn b(&self) -> &DiscreteOperator {
        &self.b
    }

    pub fn stationary(&self) -> &StationaryOperator {
        &self.stationary
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(½∫|∇χ|² + ∫W(χ), ∫j(θ))`.
    pub fn energy_parts(&self, theta: &[f64], chi: &[f64]) -> Result<(f64, f64)> {
        let e_chi = self.stationary.energy(&self.model.w, chi)?;
        let mut e_theta = 0.0;
        for (w, &th) in self.weights.iter().zip(theta) {
            e_theta += w * self.model.j.j(th)?;
        }
        Ok((e_chi, e_theta))
    }

    /// `ℰ(θ, χ) = ∫ ½|∇χ|² + W(χ) + j(θ)`.
    pub fn energy(&self, state: &State) -> Result<f64> {
        let (a, b) = self.energy_parts(state.theta().values(), state.chi().values())?;
        Ok(a + b)
    }

    /// Heat-equation load vector at time `t`.
    pub fn load(&self, t: f64) -> Result<Vec<f64>> {
        self.source.load(&self.grid, &self.bc, &self.model, t)
    }

    /// `‖g(t)‖²` in the dual norm of `B`.
    pub fn g_dual_sq(&self, t: f64) -> Result<f64> {
        if self.source.is_zero() && self.bc.theta_gamma(0.0, t).is_none_or(|v| v == 0.0) {
            return Ok(0.0);
        }
        self.b.dual_norm_sq_load(&self.load(t)?)
    }

    /// Time derivatives `(θ_t, χ_t)` given by the equations at `state`.
    /// `θ_t` is zero on Dirichlet nodes.
    pub fn rates(&self, state: &State) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = &self.model;
        let chi = state.chi().values();
        let u = state.u();
        let mut chi_t = self.a.apply(chi);
        for i in 0..chi.len() {
            chi_t[i] = -chi_t[i] - m.w.dw(chi[i])? + m.lambda.d1(chi[i]) * u[i];
        }
        let bu = self.b.apply(u);
        let load = self.load(state.t())?;
        let theta_t = (0..chi.len())
            .map(|i| {
                if self.b.is_fixed(i) {
                    0.0
                } else {
                    load[i] / self.weights[i] - bu[i] - m.lambda.d1(chi[i]) * chi_t[i]
                }
            })
            .collect();
        Ok((theta_t, chi_t))
    }

    /// One step of length `dt` from `state`.
    pub fn step(&self, state: &State, dt: f64, newton_tol: f64, max_newton: usize) -> Result<(State, StepReport)> {
        if !(dt > 0.0) || !(newton_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step needs dt > 0 and newton_tol > 0, got {dt} and {newton_tol}"
            )));
        }
        let energy_before = self.energy(state)?;
        let sys = StepSystem::new(self, state, dt)?;
        let (theta, chi, newton_iters, residual, damping_events) = sys.solve(newton_tol, max_newton)?;
        let next = State::new(
            state.t() + dt,
            Field::new(Arc::clone(&self.grid), theta)?,
            Field::new(Arc::clone(&self.grid), chi)?,
            &self.model,
        )?;
        let energy_after = self.energy(&next)?;
        Ok((
            next,
            StepReport {
                newton_iters,
                residual,
                energy_before,
                energy_after,
                damping_events,
                dt,
            },
        ))
    }
}

/// The algebraic system of one step, unknowns interleaved as
/// `(θ_0, χ_0, θ_1, χ_1, …)`.
struct StepSystem<'a> {
    p: &'a Problem,
    theta0: &'a [f64],
    chi0: &'a [f64],
    dt: f64,
    /// `M⁻¹ℓ(t + Δt)`.
    g: Vec<f64>,
}

impl<'a> StepSystem<'a> {
    fn new(p: &'a Problem, state: &'a State, dt: f64) -> Result<Self> {
        let load = p.load(state.t() + dt)?;
        let g = load.iter().zip(&p.weights).map(|(l, w)| l / w).collect();
        Ok(StepSystem {
            p,
            theta0: state.theta().values(),
            chi0: state.chi().values(),
            dt,
            g,
        })
    }

    /// Residuals `(F_heat, F_phase)`.
    fn residual(&self, theta: &[f64], chi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = &self.p.model;
        let (jl, wl) = (m.j.law(), m.w.law());
        let kappa = m.w.kappa;
        let dt = self.dt;
        let theta_inf = m.theta_inf();
        let u: Vec<f64> = theta.iter().map(|&r| jl.d1(r)).collect();
        let bu = self.p.b.apply(&u);
        let ac = self.p.a.apply(chi);
        let n = theta.len();
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];
        for i in 0..n {
            let lh = m.lambda.divided_difference(self.chi0[i], chi[i]);
            let dchi = chi[i] - self.chi0[i];
            f1[i] = if self.p.b.is_fixed(i) {
                (theta[i] - theta_inf) / dt
            } else {
                (theta[i] - self.theta0[i]) / dt + lh * dchi / dt + bu[i] - self.g[i]
            };
            f2[i] = dchi / dt + ac[i] + wl.d1(chi[i]) + kappa * dchi - lh * u[i];
        }
        (f1, f2)
    }

    fn norm(&self, f: &(Vec<f64>, Vec<f64>)) -> f64 {
        let w = &self.p.weights;
        h_norm(w, &f.0).max(h_norm(w, &f.1))
    }

    fn jacobian(&self, theta: &[f64], chi: &[f64], jac: &mut BandMatrix) {
        let m = &self.p.model;
        let (jl, wl) = (m.j.law(), m.w.law());
        let kappa = m.w.kappa;
        let dt = self.dt;
        let kb = self.p.b.stiffness();
        let ka = self.p.a.stiffness();
        let w = &self.p.weights;
        jac.clear();
        for i in 0..theta.len() {
            let (ti, ci) = (2 * i, 2 * i + 1);
            let lh = m.lambda.divided_difference(self.chi0[i], chi[i]);
            let lh_b = m.lambda.divided_difference_db(self.chi0[i], chi[i]);
            let dchi = chi[i] - self.chi0[i];
            let u = jl.d1(theta[i]);
            if self.p.b.is_fixed(i) {
                jac.add(ti, ti, 1.0 / dt);
            } else {
                jac.add(ti, ti, 1.0 / dt);
                for (k, v) in kb.row(i) {
                    jac.add(ti, 2 * k, v / w[i] * jl.d2(theta[k]));
                }
                jac.add(ti, ci, (lh + lh_b * dchi) / dt);
            }
            jac.add(ci, ci, 1.0 / dt + wl.d2(chi[i]) + kappa - lh_b * u);
            for (k, v) in ka.row(i) {
                jac.add(ci, 2 * k + 1, v / w[i]);
            }
            jac.add(ci, ti, -lh * jl.d2(theta[i]));
        }
    }

    fn admissible(&self, theta: &[f64], chi: &[f64]) -> bool {
        let jd = self.p.model.j.domain;
        let wd = self.p.model.w.domain;
        theta.iter().all(|&r| jd.distance_to_boundary(r) >= DOMAIN_MARGIN)
            && chi.iter().all(|&r| wd.distance_to_boundary(r) >= DOMAIN_MARGIN)
    }

    /// Newton from the previous state. Returns `(θ⁺, χ⁺, iterations,
    /// residual, damping events)`.
    fn solve(&self, tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>, usize, f64, usize)> {
        let n = self.theta0.len();
        let bw = self.p.a.stiffness().bandwidth().max(self.p.b.stiffness().bandwidth());
        let band = 2 * bw + 1;
        let mut theta = self.theta0.to_vec();
        let mut chi = self.chi0.to_vec();
        let mut f = self.residual(&theta, &chi);
        let mut res = self.norm(&f);
        let mut iters = 1;
        let mut damping_events = 0;
        let mut jac = BandMatrix::zeros(2 * n, band, band);
        let mut rhs = vec![0.0; 2 * n];
        while !(res <= tol) {
            if iters >= max_iter || !res.is_finite() {
                return Err(Error::NewtonDiverged {
                    iterations: iters,
                    residual: res,
                });
            }
            self.jacobian(&theta, &chi, &mut jac);
            for i in 0..n {
                rhs[2 * i] = -f.0[i];
                rhs[2 * i + 1] = -f.1[i];
            }
            let lu = jac.clone().factor()?;
            lu.solve_in_place(&mut rhs);

            let mut alpha = 1.0;
            let mut halvings = 0;
            let (mut th, mut ch) = (vec![0.0; n], vec![0.0; n]);
            loop {
                for i in 0..n {
                    th[i] = theta[i] + alpha * rhs[2 * i];
                    ch[i] = chi[i] + alpha * rhs[2 * i + 1];
                }
                if self.admissible(&th, &ch) {
                    break;
                }
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::DomainExhausted { halvings: MAX_HALVINGS });
                }
                alpha *= 0.5;
            }
            if halvings > 0 {
                damping_events += 1;
            }
            theta = th;
            chi = ch;
            f = self.residual(&theta, &chi);
            res = self.norm(&f);
            iters += 1;
        }
        Ok((theta, chi, iters, res, damping_events))
    }
}
