//! Brute-force reference solver for one time step.
//!
//! Solves the same algebraic system as [`Problem::step`](super::Problem::step)
//! but shares none of its machinery: the Laplacians are assembled densely
//! from ghost-node stencils, the Jacobian is a central finite difference, the
//! linear solves go through a dense LU, and globalization is a backtracking
//! line search on `‖F‖²` run from several seeded random starts.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{ModelSpec, Potential};
use crate::operators::BoundarySpec;

use super::source::SourceSpec;
use super::state::State;

/// Largest grid the oracle accepts.
pub const ORACLE_MAX_NODES: usize = 64;
const STARTS: usize = 4;

struct Dense {
    n: usize,
    lap_a: DMatrix<f64>,
    lap_b: DMatrix<f64>,
    fixed: Vec<bool>,
    g: Vec<f64>,
}

fn ghost_laplacian(grid: &Grid) -> DMatrix<f64> {
    let n = grid.len();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        let m = grid.multi_index(i);
        for a in 0..grid.dim() {
            let h2 = grid.spacing(a).powi(2);
            let s = grid.stride(a);
            let last = grid.nodes()[a] - 1;
            l[(i, i)] += 2.0 / h2;
            if m[a] == 0 {
                l[(i, i + s)] -= 2.0 / h2;
            } else if m[a] == last {
                l[(i, i - s)] -= 2.0 / h2;
            } else {
                l[(i, i - s)] -= 1.0 / h2;
                l[(i, i + s)] -= 1.0 / h2;
            }
        }
    }
    l
}

/// `Σ_faces 2/h_a` at boundary nodes: the ghost-node weight of a Robin face.
fn robin_face_weight(grid: &Grid, i: usize) -> f64 {
    let m = grid.multi_index(i);
    (0..grid.dim())
        .filter(|&a| m[a] == 0 || m[a] == grid.nodes()[a] - 1)
        .map(|a| 2.0 / grid.spacing(a))
        .sum()
}

impl Dense {
    fn new(grid: &Grid, bc: &BoundarySpec, model: &ModelSpec, source: &SourceSpec, t: f64) -> Result<Self> {
        let n = grid.len();
        let lap_a = ghost_laplacian(grid);
        let mut g = source.density(grid, t);
        let mut fixed = vec![false; n];
        let lap_b = match bc {
            BoundarySpec::DirichletTheta => {
                let mut l = DMatrix::zeros(n, n);
                for i in 0..n {
                    fixed[i] = grid.is_boundary(i);
                }
                for i in (0..n).filter(|i| !fixed[*i]) {
                    for a in 0..grid.dim() {
                        let h2 = grid.spacing(a).powi(2);
                        let s = grid.stride(a);
                        l[(i, i)] += 2.0 / h2;
                        for k in [i - s, i + s] {
                            if !fixed[k] {
                                l[(i, k)] -= 1.0 / h2;
                            }
                        }
                    }
                }
                l
            }
            BoundarySpec::RobinTheta { eta, .. } => {
                let mut l = lap_a.clone();
                let tg = bc.theta_gamma(model.theta_inf(), t).unwrap();
                let ug = model.j.dj(tg)?;
                for i in 0..n {
                    let c = robin_face_weight(grid, i);
                    if c > 0.0 {
                        l[(i, i)] += eta * c;
                        g[i] += eta * c * ug;
                    }
                }
                l
            }
        };
        Ok(Dense {
            n,
            lap_a,
            lap_b,
            fixed,
            g,
        })
    }
}

fn secant(model: &ModelSpec, a: f64, b: f64) -> f64 {
    let lam = model.lambda.law();
    if (b - a).abs() > 1e-12 * (1.0 + a.abs() + b.abs()) {
        (lam.value(b) - lam.value(a)) / (b - a)
    } else {
        lam.d1(0.5 * (a + b))
    }
}

struct System<'a> {
    d: Dense,
    model: &'a ModelSpec,
    theta0: &'a [f64],
    chi0: &'a [f64],
    dt: f64,
}

impl System<'_> {
    fn inside(&self, z: &DVector<f64>) -> bool {
        let n = self.d.n;
        let (jd, wd) = (self.model.j.domain, self.model.w.domain);
        (0..n).all(|i| jd.distance_to_boundary(z[i]) > 1e-8 && wd.distance_to_boundary(z[n + i]) > 1e-8)
    }

    fn f(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.d.n;
        let m = self.model;
        let theta = z.rows(0, n);
        let chi = z.rows(n, n);
        let u = DVector::from_iterator(n, theta.iter().map(|&r| m.j.law().d1(r)));
        let bu = &self.d.lap_b * &u;
        let ac = &self.d.lap_a * chi;
        let mut out = DVector::zeros(2 * n);
        for i in 0..n {
            let lh = secant(m, self.chi0[i], chi[i]);
            let dchi = chi[i] - self.chi0[i];
            out[i] = if self.d.fixed[i] {
                theta[i] - m.theta_inf()
            } else {
                (theta[i] - self.theta0[i]) / self.dt + lh * dchi / self.dt + bu[i] - self.d.g[i]
            };
            out[n + i] = dchi / self.dt + ac[i] + m.w.law().d1(chi[i]) + m.w.kappa * dchi - lh * u[i];
        }
        out
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let dim = z.len();
        let mut j = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let h = 1e-7 * (1.0 + z[c].abs());
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[c] += h;
            zm[c] -= h;
            let col = (self.f(&zp) - self.f(&zm)) / (2.0 * h);
            j.set_column(c, &col);
        }
        j
    }

    fn newton(&self, mut z: DVector<f64>) -> Option<DVector<f64>> {
        let mut fz = self.f(&z);
        let mut phi = fz.norm_squared();
        for _ in 0..200 {
            let delta = self.jacobian(&z).lu().solve(&(-&fz))?;
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = &z + alpha * &delta;
                if self.inside(&trial) {
                    let ft = self.f(&trial);
                    let pt = ft.norm_squared();
                    if pt <= (1.0 - 1e-4 * alpha) * phi || pt == 0.0 {
                        accepted = Some((trial, ft, pt));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            let step = alpha * delta.amax();
            match accepted {
                Some((zn, fn_, pn)) => {
                    z = zn;
                    fz = fn_;
                    phi = pn;
                }
                None => break,
            }
            if fz.amax() < 1e-13 || step < 1e-15 * (1.0 + z.amax()) {
                break;
            }
        }
        (fz.amax() < 1e-8).then_some(z)
    }
}

/// Solves one step of length `dt` by dense damped Newton from the previous
/// state and `STARTS - 1` random perturbations of it (seeded by `seed`).
///
/// Fails with [`Error::OracleFailed`] if no start converges or if two starts
/// converge to solutions more than `1e-8` apart.
pub fn oracle_step(
    state: &State,
    dt: f64,
    model: &ModelSpec,
    grid: &Grid,
    bc: &BoundarySpec,
    source: &SourceSpec,
    seed: u64,
) -> Result<State> {
    let n = grid.len();
    if n > ORACLE_MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "oracle accepts at most {ORACLE_MAX_NODES} nodes, got {n}"
        )));
    }
    if **state.grid() != *grid {
        return Err(Error::ConfigMismatch("state and grid differ".into()));
    }
    let sys = System {
        d: Dense::new(grid, bc, model, source, state.t() + dt)?,
        model,
        theta0: state.theta().values(),
        chi0: state.chi().values(),
        dt,
    };
    let z0 = DVector::from_iterator(
        2 * n,
        state.theta().values().iter().chain(state.chi().values()).cloned(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solutions: Vec<DVector<f64>> = Vec::new();
    for s in 0..STARTS {
        let mut start = z0.clone();
        if s > 0 {
            let noise: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let mut scale = 1.0;
            loop {
                start = DVector::from_iterator(2 * n, (0..2 * n).map(|i| z0[i] + scale * noise[i]));
                if sys.inside(&start) || scale < 1e-6 {
                    break;
                }
                scale *= 0.5;
            }
        }
        if let Some(z) = sys.newton(start) {
            solutions.push(z);
        }
    }
    let Some(first) = solutions.first() else {
        return Err(Error::OracleFailed(format!("none of {STARTS} starts converged")));
    };
    for other in &solutions[1..] {
        let gap = (other - first).amax();
        if gap > 1e-8 {
            return Err(Error::OracleFailed(format!(
                "starts converged to distinct solutions ({gap:e} apart)"
            )));
        }
    }
    let grid = state.grid().clone();
    State::new(
        state.t() + dt,
        Field::new(grid.clone(), first.rows(0, n).iter().cloned().collect())?,
        Field::new(grid, first.rows(n, n).iter().cloned().collect())?,
        model,
    )
}
