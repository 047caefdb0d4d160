//! Experiment files.
//!
//! An experiment is a line-oriented list of `section.key = value` entries;
//! `#` starts a comment. Keys are grouped in the sections below (defaults in
//! parentheses).
//!
//! ```text
//! model.j        = caginalp_j | penrose_fife_j(tau_c, sigma) | mixed_j(tau_c)
//! model.W        = quartic_W | logarithmic_W(c)
//! model.lambda   = linear_lambda(ell) | tanh_lambda(ell)
//! grid.extents   = 1.0            # one value per axis, comma separated
//! grid.nodes     = 128            # one value per axis
//! grid.dim       = 1              # optional, must match the lists
//! bc.kind        = dirichlet | robin
//! bc.eta         = 1.0            # robin only
//! bc.theta_gamma = 0.0            # robin: amplitude of θ_Γ - θ∞ (0)
//! bc.theta_gamma_envelope = exponential(rate=1)    # (constant)
//! source.profile = none | sine | cosine | constant (none)
//! source.amplitude = 0.1
//! source.envelope  = constant | compact(t_end) | exponential(rate) | power(exponent)
//! source.p, source.q, source.delta                 # integrability tags
//! initial.theta  = field expression (constant(θ∞))
//! initial.chi    = field expression
//! run.dt, run.t_end, run.newton_tol (1e-10), run.max_newton (50),
//! run.trace_every (1), run.snapshot_every (0), run.stop_on_converged (false),
//! run.allow_unstable (false)
//! steady.guesses = field expression; field expression; …
//! steady.tol     = 1e-10
//! diagnostics.dissipation_tol (1e-9), diagnostics.expect_converged (false),
//! diagnostics.s (1), diagnostics.eps_loj (0.1), diagnostics.fit (true),
//! diagnostics.monitor (true), diagnostics.steady_reference (path),
//! diagnostics.oracle_steps (0)
//! output.dir     = out
//! ```
//!
//! Field expressions are `constant(c)`, `cosine(amplitude, k, offset)`,
//! `sine(amplitude, k, offset)`, `tanh(center, width, amplitude, offset)`,
//! `linear(a, b)` and `snapshot(path)`; see [`FieldExpr`]. Snapshot and
//! steady-reference paths are relative to the experiment file; `output.dir`
//! is relative to the working directory.

mod expr;
mod field;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

pub use expr::{parse_bool, parse_f64, parse_list, Expr};
pub use field::FieldExpr;

use crate::dynamics::{Problem, SourceSpec, SourceTags, SpaceProfile, State, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::ModelSpec;
use crate::model::{builtin, Component, Params};
use crate::operators::BoundarySpec;
use crate::schedule::Envelope;

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "model.j",
    "model.W",
    "model.lambda",
    "grid.dim",
    "grid.extents",
    "grid.nodes",
    "bc.kind",
    "bc.eta",
    "bc.theta_gamma",
    "bc.theta_gamma_envelope",
    "source.profile",
    "source.amplitude",
    "source.envelope",
    "source.p",
    "source.q",
    "source.delta",
    "initial.theta",
    "initial.chi",
    "run.dt",
    "run.t_end",
    "run.newton_tol",
    "run.max_newton",
    "run.trace_every",
    "run.snapshot_every",
    "run.stop_on_converged",
    "run.allow_unstable",
    "steady.guesses",
    "steady.tol",
    "diagnostics.dissipation_tol",
    "diagnostics.expect_converged",
    "diagnostics.s",
    "diagnostics.eps_loj",
    "diagnostics.fit",
    "diagnostics.monitor",
    "diagnostics.steady_reference",
    "diagnostics.oracle_steps",
    "output.dir",
];

const REQUIRED: &[&str] = &[
    "model.j",
    "model.W",
    "model.lambda",
    "grid.extents",
    "grid.nodes",
    "initial.chi",
];

/// Raw `key = value` entries with their line numbers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    pub entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    /// Splits the text into entries. Fails on malformed lines and repeated
    /// keys; unknown keys are left for validation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ParseError {
                    line,
                    message: format!("expected `section.key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let well_formed = key
                .split_once('.')
                .is_some_and(|(s, k)| !s.is_empty() && !k.is_empty() && !k.contains('.'));
            if !well_formed || key.contains(char::is_whitespace) {
                return Err(Error::ParseError {
                    line,
                    message: format!("key `{key}` is not of the form `section.key`"),
                });
            }
            if value.is_empty() {
                return Err(Error::ParseError {
                    line,
                    message: format!("missing value for `{key}`"),
                });
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (line, value.to_string())) {
                return Err(Error::ParseError {
                    line,
                    message: format!("`{key}` already set on line {first}"),
                });
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Replaces (or adds) one entry, as done by parameter sweeps.
    pub fn set(&mut self, key: &str, value: &str) {
        let line = self.entries.get(key).map_or(0, |(l, _)| *l);
        self.entries.insert(key.to_string(), (line, value.to_string()));
    }
}

/// Settings of the steady-state catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyConfig {
    pub guesses: Vec<FieldExpr>,
    pub tol: f64,
}

/// Which analyses to run after a trajectory and what to assert.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsConfig {
    pub dissipation_tol: f64,
    pub expect_converged: bool,
    pub s: f64,
    pub eps_loj: f64,
    pub fit: bool,
    pub monitor: bool,
    pub steady_reference: Option<PathBuf>,
    /// Leading steps cross-checked against the brute-force oracle.
    pub oracle_steps: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            dissipation_tol: 1e-9,
            expect_converged: false,
            s: 1.0,
            eps_loj: 0.1,
            fit: true,
            monitor: true,
            steady_reference: None,
            oracle_steps: 0,
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub raw: RawConfig,
    /// Directory relative paths inside the file are resolved against.
    pub base_dir: PathBuf,
    pub model: ModelSpec,
    pub grid: Arc<Grid>,
    pub bc: BoundarySpec,
    pub source: SourceSpec,
    pub initial_theta: FieldExpr,
    pub initial_chi: FieldExpr,
    pub run: TrajectoryConfig,
    pub allow_unstable: bool,
    pub steady: SteadyConfig,
    pub diagnostics: DiagnosticsConfig,
    pub output_dir: Option<PathBuf>,
}

/// Reads and validates an experiment file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_str(&text, base)
}

/// Parses experiment text; relative paths resolve against `base_dir`.
pub fn parse_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<ExperimentConfig> {
    ExperimentConfig::from_raw(RawConfig::parse(text)?, base_dir.into())
}

/// Collects violations instead of stopping at the first one.
struct Checker<'a> {
    raw: &'a RawConfig,
    errors: Vec<String>,
}

impl Checker<'_> {
    fn fail(&mut self, key: &str, msg: impl std::fmt::Display) {
        match self.raw.entries.get(key) {
            Some((line, _)) if *line > 0 => self.errors.push(format!("{key} (line {line}): {msg}")),
            _ => self.errors.push(format!("{key}: {msg}")),
        }
    }

    fn value<T>(
        &mut self,
        key: &str,
        default: Option<T>,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Option<T> {
        match self.raw.get(key) {
            None => {
                if default.is_none() && REQUIRED.contains(&key) {
                    self.fail(key, "missing required key");
                }
                default
            }
            Some(v) => match parse(v) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.fail(key, e);
                    None
                }
            },
        }
    }

    fn num(&mut self, key: &str, default: f64) -> f64 {
        self.value(key, Some(default), parse_f64).unwrap_or(default)
    }

    fn count(&mut self, key: &str, default: usize) -> usize {
        self.value(key, Some(default), |s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{s}` is not a non-negative integer"))
        })
        .unwrap_or(default)
    }

    fn flag(&mut self, key: &str, default: bool) -> bool {
        self.value(key, Some(default), parse_bool).unwrap_or(default)
    }

    fn expr(&mut self, key: &str) -> Option<Expr> {
        self.value(key, None, Expr::parse)
    }

    fn component(&mut self, key: &str) -> Option<Component> {
        let e = self.expr(key)?;
        let params: Params = match e.params(&param_order(&e.name)) {
            Ok(p) => p,
            Err(msg) => {
                self.fail(key, msg);
                return None;
            }
        };
        match builtin(&e.name, &params) {
            Ok(c) => Some(c),
            Err(Error::UnknownModel(name)) => {
                self.fail(key, format!("UnknownModel: no built-in named `{name}`"));
                None
            }
            Err(err) => {
                self.fail(key, err);
                None
            }
        }
    }
}

/// Positional parameter order of the built-in laws.
fn param_order(name: &str) -> Vec<&'static str> {
    match name {
        "penrose_fife_j" => vec!["tau_c", "sigma"],
        "mixed_j" => vec!["tau_c"],
        "logarithmic_W" => vec!["c"],
        "linear_lambda" | "tanh_lambda" => vec!["ell"],
        _ => Vec::new(),
    }
}

/// Parses `constant`, `compact(t_end)`, `exponential(rate)`, `power(exponent)`.
pub fn parse_envelope(text: &str) -> std::result::Result<Envelope, String> {
    let e = Expr::parse(text)?;
    let env = match e.name.as_str() {
        "constant" => {
            e.check_args(&[])?;
            Envelope::Constant
        }
        "compact" => {
            e.check_args(&["t_end"])?;
            Envelope::Compact {
                t_end: e.num("t_end", 0, None)?,
            }
        }
        "exponential" => {
            e.check_args(&["rate"])?;
            Envelope::Exponential {
                rate: e.num("rate", 0, None)?,
            }
        }
        "power" => {
            e.check_args(&["exponent"])?;
            Envelope::Power {
                exponent: e.num("exponent", 0, None)?,
            }
        }
        other => return Err(format!("unknown envelope `{other}`")),
    };
    env.validate().map_err(|err| err.to_string())?;
    Ok(env)
}

fn parse_profile(text: &str) -> std::result::Result<Option<SpaceProfile>, String> {
    match text.trim() {
        "none" | "zero" => Ok(None),
        "sine" => Ok(Some(SpaceProfile::Sine)),
        "cosine" => Ok(Some(SpaceProfile::Cosine)),
        "constant" => Ok(Some(SpaceProfile::Constant)),
        other => Err(format!(
            "unknown source profile `{other}` (none, sine, cosine, constant)"
        )),
    }
}

impl ExperimentConfig {
    /// Validates raw entries and builds the experiment. Every violation is
    /// reported in a single [`Error::ValidationError`].
    pub fn from_raw(raw: RawConfig, base_dir: PathBuf) -> Result<Self> {
        let mut c = Checker {
            raw: &raw,
            errors: Vec::new(),
        };
        for key in raw.entries.keys() {
            if !KEYS.contains(&key.as_str()) {
                c.fail(key, "unknown key");
            }
        }

        let j = c.component("model.j").and_then(|x| {
            x.into_heat_flux()
                .map_err(|e| e.to_string())
                .map_err(|e| c.fail("model.j", e))
                .ok()
        });
        let w = c.component("model.W").and_then(|x| {
            x.into_well()
                .map_err(|e| e.to_string())
                .map_err(|e| c.fail("model.W", e))
                .ok()
        });
        let lambda = c.component("model.lambda").and_then(|x| {
            x.into_latent()
                .map_err(|e| e.to_string())
                .map_err(|e| c.fail("model.lambda", e))
                .ok()
        });

        let extents = c.value("grid.extents", None, parse_list);
        let nodes = c.value("grid.nodes", None, |s| {
            s.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| format!("`{}` is not a node count", v.trim()))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
        });
        let dim = c.value("grid.dim", None::<usize>, |s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{s}` is not a dimension"))
        });
        let grid = match (extents, nodes) {
            (Some(ext), Some(nodes)) => {
                if let Some(d) = dim.filter(|d| *d != ext.len() || *d != nodes.len()) {
                    c.fail(
                        "grid.dim",
                        format!(
                            "dim = {d} but {} extents and {} node counts given",
                            ext.len(),
                            nodes.len()
                        ),
                    );
                    None
                } else {
                    match Grid::new(ext, nodes) {
                        Ok(g) => Some(Arc::new(g)),
                        Err(e) => {
                            c.fail("grid.nodes", e);
                            None
                        }
                    }
                }
            }
            _ => None,
        };

        let bc = match c.raw.get("bc.kind").unwrap_or("dirichlet") {
            "dirichlet" => {
                for k in ["bc.eta", "bc.theta_gamma", "bc.theta_gamma_envelope"] {
                    if raw.get(k).is_some() {
                        c.fail(k, "only meaningful with bc.kind = robin");
                    }
                }
                Some(BoundarySpec::DirichletTheta)
            }
            "robin" => {
                let eta = c.value("bc.eta", None, parse_f64);
                if eta.is_none() && raw.get("bc.eta").is_none() {
                    c.fail("bc.eta", "required for bc.kind = robin");
                }
                let amplitude = c.num("bc.theta_gamma", 0.0);
                let envelope = c.value("bc.theta_gamma_envelope", Some(Envelope::Constant), parse_envelope);
                match (eta, envelope) {
                    (Some(eta), Some(envelope)) => {
                        let bc = BoundarySpec::RobinTheta {
                            eta,
                            amplitude,
                            envelope,
                        };
                        match bc.validate() {
                            Ok(()) => Some(bc),
                            Err(e) => {
                                c.fail("bc.eta", e);
                                None
                            }
                        }
                    }
                    _ => None,
                }
            }
            other => {
                c.fail("bc.kind", format!("unknown boundary kind `{other}` (dirichlet, robin)"));
                None
            }
        };

        let profile = c.value("source.profile", Some(None), parse_profile).flatten();
        let amplitude = c.num("source.amplitude", if profile.is_some() { 1.0 } else { 0.0 });
        let envelope = c
            .value("source.envelope", Some(Envelope::Constant), parse_envelope)
            .unwrap_or(Envelope::Constant);
        let tags = SourceTags {
            p: c.value("source.p", None, parse_f64),
            q: c.value("source.q", None, parse_f64),
            delta: c.value("source.delta", None, parse_f64),
        };
        let source = SourceSpec {
            profile,
            amplitude,
            envelope,
            tags,
        };
        if let Err(e) = source.validate() {
            c.fail("source.envelope", e);
        }

        let initial_chi = c.value("initial.chi", None, FieldExpr::parse);
        let initial_theta = c.value("initial.theta", Some(FieldExpr::ThetaInf), FieldExpr::parse);

        let defaults = TrajectoryConfig::default();
        let run = TrajectoryConfig {
            dt: c.num("run.dt", defaults.dt),
            t_end: c.num("run.t_end", defaults.t_end),
            newton_tol: c.num("run.newton_tol", defaults.newton_tol),
            max_newton: c.count("run.max_newton", defaults.max_newton),
            trace_every: c.count("run.trace_every", defaults.trace_every),
            snapshot_every: c.count("run.snapshot_every", defaults.snapshot_every),
            stop_on_converged: c.flag("run.stop_on_converged", defaults.stop_on_converged),
            omega: defaults.omega,
        };
        if let Err(Error::ValidationError(list)) = run.validate() {
            c.errors.extend(list);
        }
        let allow_unstable = c.flag("run.allow_unstable", false);
        if let Some(w) = &w {
            if !allow_unstable && run.dt > 1.0 / w.kappa {
                c.fail(
                    "run.dt",
                    format!(
                        "dt = {} violates the stability rule dt <= 1/kappa = {} (kappa = {} for {}); set run.allow_unstable = true to override",
                        run.dt,
                        1.0 / w.kappa,
                        w.kappa,
                        w.name
                    ),
                );
            }
        }

        let guesses = c
            .value("steady.guesses", Some(Vec::new()), |s| {
                s.split(';')
                    .filter(|g| !g.trim().is_empty())
                    .map(FieldExpr::parse)
                    .collect()
            })
            .unwrap_or_default();
        let steady = SteadyConfig {
            guesses,
            tol: c.num("steady.tol", 1e-10),
        };
        if !(steady.tol > 0.0) {
            c.fail("steady.tol", "must be positive");
        }

        let dd = DiagnosticsConfig::default();
        let diagnostics = DiagnosticsConfig {
            dissipation_tol: c.num("diagnostics.dissipation_tol", dd.dissipation_tol),
            expect_converged: c.flag("diagnostics.expect_converged", dd.expect_converged),
            s: c.num("diagnostics.s", dd.s),
            eps_loj: c.num("diagnostics.eps_loj", dd.eps_loj),
            fit: c.flag("diagnostics.fit", dd.fit),
            monitor: c.flag("diagnostics.monitor", dd.monitor),
            steady_reference: raw.get("diagnostics.steady_reference").map(|p| base_dir.join(p)),
            oracle_steps: c.count("diagnostics.oracle_steps", dd.oracle_steps),
        };
        if !(diagnostics.s >= 0.0) {
            c.fail("diagnostics.s", "must be non-negative");
        }
        if !(diagnostics.eps_loj > 0.0) {
            c.fail("diagnostics.eps_loj", "must be positive");
        }
        let output_dir = raw.get("output.dir").map(PathBuf::from);

        let mut errors = std::mem::take(&mut c.errors);
        let (Some(j), Some(w), Some(lambda), Some(grid), Some(bc), Some(initial_chi), Some(initial_theta)) =
            (j, w, lambda, grid, bc, initial_chi, initial_theta)
        else {
            if errors.is_empty() {
                errors.push("incomplete configuration".into());
            }
            return Err(Error::ValidationError(errors));
        };
        let model = ModelSpec::new(j, w, lambda);
        let cfg = ExperimentConfig {
            raw,
            base_dir,
            model,
            grid,
            bc,
            source,
            initial_theta,
            initial_chi,
            run,
            allow_unstable,
            steady,
            diagnostics,
            output_dir,
        };
        // Initial admissibility: fields inside the domains, energy finite.
        match cfg.initial_state().and_then(|s| Ok((cfg.problem()?, s))) {
            Ok((p, s)) => match p.energy(&s) {
                Ok(e) if e.is_finite() => {}
                Ok(e) => errors.push(format!("initial energy is not finite ({e})")),
                Err(e) => errors.push(format!("initial energy: {e}")),
            },
            Err(e) => errors.push(format!("initial state: {e}")),
        }
        for (k, g) in cfg.steady.guesses.iter().enumerate() {
            if let Err(e) = g.eval(&cfg.grid, cfg.model.theta_inf(), &cfg.base_dir) {
                errors.push(format!("steady.guesses[{k}]: {e}"));
            }
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::ValidationError(errors))
        }
    }

    /// Re-validates with one entry replaced.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut raw = self.raw.clone();
        raw.set(key, value);
        ExperimentConfig::from_raw(raw, self.base_dir.clone())
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(
            self.model.clone(),
            Arc::clone(&self.grid),
            self.bc.clone(),
            self.source.clone(),
        )
    }

    pub fn initial_state(&self) -> Result<State> {
        let theta = self
            .initial_theta
            .eval(&self.grid, self.model.theta_inf(), &self.base_dir)?;
        let chi = self
            .initial_chi
            .eval(&self.grid, self.model.theta_inf(), &self.base_dir)?;
        State::new(0.0, theta, chi, &self.model)
    }

    /// Steady-state guesses evaluated on the grid.
    pub fn guesses(&self) -> Result<Vec<crate::grid::Field>> {
        self.steady
            .guesses
            .iter()
            .map(|g| g.eval(&self.grid, self.model.theta_inf(), &self.base_dir))
            .collect()
    }

    /// Entries in file order of keys, for echoing into reports.
    pub fn entries(&self) -> BTreeMap<String, String> {
        self.raw
            .entries
            .iter()
            .map(|(k, (_, v))| (k.clone(), v.clone()))
            .collect()
    }
}
