//! Pipelines behind the `phaseflow` subcommands.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success, every requested assertion passed |
//! | 1    | I/O failure                               |
//! | 2    | malformed or invalid configuration        |
//! | 3    | solver failure                            |
//! | 4    | a diagnostic assertion failed             |
//!
//! A `run` writes into its output directory:
//!
//! * `trace.csv`: one row per traced step.
//! * `snap_<step>.pfld` / `theta_<step>.pfld`: stored `χ` and `θ` fields.
//! * `config.cfg`: the effective configuration.
//! * `steady_ref.pfld`: the steady reference used by the fits, if any.
//! * `steady/`: the steady catalog, if `steady.guesses` is set.
//! * `diagnostics.json`: every report, the assertions and the file list.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_config, ExperimentConfig};
use crate::diagnostics::{
    check_trace_dissipation, distance_series, estimate_from_samples, field_samples, fit_rate_series, monitor_bounds,
    phi_increases, phi_series, tail_test, trajectory_samples, EnergyTrace, Verdict,
};
use crate::dynamics::{oracle_step, run, Trajectory, ORACLE_MAX_NODES};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::validate_hypotheses;
use crate::norms::h_norm;
use crate::snapshot::Snapshot;
use crate::steady::{catalog, check_range, solve_stationary, stationary_energy, write_catalog};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

/// Default output directory when neither `--out`, `PHASEFLOW_OUT` nor
/// `output.dir` is given.
pub const DEFAULT_OUT: &str = "phaseflow_out";

/// Tolerance for the oracle cross-check of leading steps.
pub const ORACLE_CHECK_TOL: f64 = 1e-8;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::ParseError { .. }
        | Error::ValidationError(_)
        | Error::UnknownModel(_)
        | Error::InvalidParameter(_)
        | Error::ConfigMismatch(_) => EXIT_CONFIG,
        Error::DomainViolation { .. }
        | Error::SingularSolve(_)
        | Error::NewtonDiverged { .. }
        | Error::DomainExhausted { .. }
        | Error::OracleFailed(_)
        | Error::DegenerateJacobian { .. } => EXIT_SOLVER,
        Error::InsufficientDecay(_) | Error::InsufficientSamples { .. } => EXIT_ASSERTION,
    }
}

/// Command-line options shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Seed for the oracle multi-start.
    pub seed: u64,
    pub quiet: bool,
}

impl RunOptions {
    /// `--out`, then `PHASEFLOW_OUT`, then the config's `output.dir`.
    pub fn resolve_out(&self, from_config: Option<&Path>) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        if let Some(p) = std::env::var_os("PHASEFLOW_OUT").filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        from_config.map_or_else(|| PathBuf::from(DEFAULT_OUT), Path::to_path_buf)
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// What a pipeline produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    /// The content of the JSON report that was written.
    pub report: Value,
    pub assertions: Vec<Assertion>,
}

impl Outcome {
    pub fn failed(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed().is_empty() {
            EXIT_OK
        } else {
            EXIT_ASSERTION
        }
    }
}

/// Collects output files relative to the output directory.
struct Files {
    dir: PathBuf,
    list: Vec<String>,
}

impl Files {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Files {
            dir: dir.to_path_buf(),
            list: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.list.push(name.to_string());
        self.dir.join(name)
    }

    fn add(&mut self, p: &Path) {
        let rel = p.strip_prefix(&self.dir).unwrap_or(p);
        self.list.push(rel.to_string_lossy().replace('\\', "/"));
    }

    fn write_report(&mut self, name: &str, mut report: Value) -> Result<Value> {
        let path = self.path(name);
        report["files"] = json!(self.list);
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(report)
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn skipped(e: &Error) -> Value {
    json!({ "skipped": e.to_string() })
}

fn config_text(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    for (k, v) in cfg.entries() {
        writeln!(s, "{k} = {v}").unwrap();
    }
    s
}

/// Loads or computes the reference steady state for the fits.
fn steady_reference(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<Option<(Field, &'static str)>> {
    if let Some(p) = &cfg.diagnostics.steady_reference {
        let snap = Snapshot::read(p)?;
        if snap.grid != *cfg.grid {
            return Err(Error::ConfigMismatch(format!(
                "{} was written on a different grid",
                p.display()
            )));
        }
        return Ok(Some((Field::new(Arc::clone(&cfg.grid), snap.values)?, "file")));
    }
    if traj.verdict.verdict != Verdict::Converged {
        return Ok(None);
    }
    let s = solve_stationary(traj.final_state.chi(), &cfg.model, cfg.steady.tol)?;
    Ok(Some((s.chi, "solved")))
}

/// Largest nodal deviation between the scheme and the oracle over the
/// first `k` steps of the trajectory, each started from the scheme's state.
fn oracle_check(cfg: &ExperimentConfig, traj: &Trajectory, k: usize, seed: u64) -> Result<f64> {
    let problem = cfg.problem()?;
    let mut state = cfg.initial_state()?;
    let mut worst = 0.0f64;
    for step in 0..k.min(traj.steps) {
        let (next, _) = problem.step(&state, cfg.run.dt, cfg.run.newton_tol, cfg.run.max_newton)?;
        let o = oracle_step(
            &state,
            cfg.run.dt,
            &cfg.model,
            &cfg.grid,
            &cfg.bc,
            &cfg.source,
            seed.wrapping_add(step as u64),
        )?;
        for (a, b) in next.theta().values().iter().zip(o.theta().values()) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in next.chi().values().iter().zip(o.chi().values()) {
            worst = worst.max((a - b).abs());
        }
        state = next;
    }
    Ok(worst)
}

/// Integrates the experiment, writes every artifact and evaluates the
/// requested assertions.
///
/// Solver failures are returned as errors after a minimal
/// `diagnostics.json` recording the failure has been written.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let out = opts.resolve_out(cfg.output_dir.as_deref());
    let mut files = Files::new(&out)?;
    fs::write(files.path("config.cfg"), config_text(cfg))?;

    let problem = cfg.problem()?;
    let initial = cfg.initial_state()?;
    let traj = match run(&problem, initial, &cfg.run) {
        Ok(t) => t,
        Err(e) => {
            files.write_report(
                "diagnostics.json",
                json!({ "kind": "run", "config": cfg.entries(), "error": e.to_string(), "exit_code": exit_code(&e) }),
            )?;
            return Err(e);
        }
    };

    traj.trace.write_csv(files.path("trace.csv"))?;
    for f in &traj.fields {
        let chi = Field::new(Arc::clone(&cfg.grid), f.chi.clone())?;
        let theta = Field::new(Arc::clone(&cfg.grid), f.theta.clone())?;
        Snapshot::new(&chi, f.t).write(files.path(&format!("snap_{:08}.pfld", f.step)))?;
        Snapshot::new(&theta, f.t).write(files.path(&format!("theta_{:08}.pfld", f.step)))?;
    }

    let d = &cfg.diagnostics;
    let mut report = json!({ "kind": "run", "config": cfg.entries() });
    let mut assertions = Vec::new();

    let first = traj.trace.rows.first().map_or(f64::NAN, |r| r.energy);
    let last = traj.trace.last().map_or(f64::NAN, |r| r.energy);
    report["summary"] = json!({
        "steps": traj.steps,
        "t_final": traj.final_state.t(),
        "retries": traj.retries,
        "damping_events": traj.damping_events,
        "energy_initial": first,
        "energy_final": last,
    });

    let diss = check_trace_dissipation(&traj.trace, d.dissipation_tol);
    assertions.push(Assertion {
        name: "dissipation".into(),
        passed: diss.pass,
        detail: format!(
            "{} steps checked, worst margin {:e}, {} violations",
            diss.steps_checked,
            diss.worst_margin,
            diss.violations.len()
        ),
    });
    report["dissipation"] = to_json(&diss);

    report["omega_limit"] = to_json(&traj.verdict);
    if d.expect_converged {
        assertions.push(Assertion {
            name: "omega_limit".into(),
            passed: traj.verdict.verdict == Verdict::Converged,
            detail: format!(
                "verdict {:?} at t = {}, stationary residual {:e}",
                traj.verdict.verdict, traj.verdict.t, traj.verdict.certified_residual
            ),
        });
    }

    if d.oracle_steps > 0 {
        if cfg.grid.len() > ORACLE_MAX_NODES {
            report["oracle"] = json!({ "skipped": format!("grid has more than {ORACLE_MAX_NODES} nodes") });
        } else {
            match oracle_check(cfg, &traj, d.oracle_steps, opts.seed) {
                Ok(dev) => {
                    report["oracle"] =
                        json!({ "steps": d.oracle_steps.min(traj.steps), "max_deviation": dev, "seed": opts.seed });
                    assertions.push(Assertion {
                        name: "oracle_agreement".into(),
                        passed: dev <= ORACLE_CHECK_TOL,
                        detail: format!("max nodal deviation {dev:e}"),
                    });
                }
                Err(e) => {
                    report["oracle"] = json!({ "error": e.to_string(), "seed": opts.seed });
                    assertions.push(Assertion {
                        name: "oracle_agreement".into(),
                        passed: false,
                        detail: e.to_string(),
                    });
                }
            }
        }
    }

    match steady_reference(cfg, &traj) {
        Ok(Some((chi_inf, origin))) => {
            let path = files.path("steady_ref.pfld");
            Snapshot::new(&chi_inf, traj.final_state.t()).write(&path)?;
            let w = cfg.grid.weights();
            let dist = h_norm(&w, traj.final_state.chi().sub(&chi_inf).values());
            let e_inf = stationary_energy(&chi_inf, &cfg.model)?;
            report["steady_reference"] = json!({
                "origin": origin,
                "path": "steady_ref.pfld",
                "energy": e_inf,
                "distance_from_final_H": dist,
            });
            let phi = phi_series(&traj.trace, e_inf);
            let inc = phi_increases(&phi, d.dissipation_tol);
            report["phi"] = json!({ "initial": phi.first(), "final": phi.last(), "increases": inc.len() });
            if d.fit {
                let zeta = match trajectory_samples(&traj, &chi_inf, &cfg.model)
                    .and_then(|s| estimate_from_samples(&s, d.eps_loj))
                {
                    Ok(fit) => {
                        report["lojasiewicz"] = to_json(&fit);
                        Some(fit.zeta)
                    }
                    Err(e) => {
                        report["lojasiewicz"] = skipped(&e);
                        None
                    }
                };
                report["rate_fit"] = match distance_series(&traj, &chi_inf)
                    .and_then(|(t, dd)| fit_rate_series(&t, &dd, zeta, cfg.source.tags.delta))
                {
                    Ok(fit) => to_json(&fit),
                    Err(e) => skipped(&e),
                };
            }
        }
        Ok(None) => {
            report["steady_reference"] = json!({ "skipped": "trajectory did not converge and no reference was given" });
        }
        Err(e) => report["steady_reference"] = skipped(&e),
    }

    if d.monitor {
        report["monitor"] = to_json(&monitor_bounds(&traj.trace, d.s));
    }
    if let Some(delta) = cfg.source.tags.delta {
        let env = (!cfg.source.is_zero()).then(|| cfg.source.envelope.tail_condition(delta));
        report["tail_test"] = to_json(&tail_test(&traj.trace, delta, env));
    }

    if !cfg.steady.guesses.is_empty() {
        report["steady_catalog"] = steady_catalog(cfg, &out.join("steady"), &mut files, &mut assertions)?;
    }

    report["assertions"] = to_json(&assertions);
    let report = files.write_report("diagnostics.json", report)?;
    opts.say(format!(
        "run: {} steps to t = {}, verdict {:?}, energy {first:.6e} -> {last:.6e}",
        traj.steps,
        traj.final_state.t(),
        traj.verdict.verdict
    ));
    for a in &assertions {
        opts.say(format!(
            "  [{}] {}: {}",
            if a.passed { "pass" } else { "FAIL" },
            a.name,
            a.detail
        ));
    }
    opts.say(format!("  output in {}", out.display()));
    Ok(Outcome {
        out_dir: out,
        report,
        assertions,
    })
}

/// Solves from every guess, writes the catalog into `dir` and asserts that
/// every solution lies in the confinement interval of `W`.
fn steady_catalog(
    cfg: &ExperimentConfig,
    dir: &Path,
    files: &mut Files,
    assertions: &mut Vec<Assertion>,
) -> Result<Value> {
    let guesses = cfg.guesses()?;
    let (states, failures) = catalog(&guesses, &cfg.model, cfg.steady.tol)?;
    let i1 = cfg.model.w.confinement_interval();
    let mut entries = Vec::new();
    let mut all_inside = true;
    for (k, s) in states.iter().enumerate() {
        let range = check_range(s, i1);
        all_inside &= range.inside;
        entries.push(json!({
            "index": k,
            "residual": s.residual,
            "energy": s.energy,
            "range": [s.range.0, s.range.1],
            "constant": s.is_constant(),
            "newton_iters": s.newton_iters,
            "range_check": to_json(&range),
        }));
    }
    for p in write_catalog(dir, &states)? {
        files.add(&p);
    }
    assertions.push(Assertion {
        name: "steady_range".into(),
        passed: all_inside,
        detail: format!(
            "{} distinct states, confinement interval [{}, {}]",
            states.len(),
            i1.0,
            i1.1
        ),
    });
    let failed: Vec<Value> = failures
        .iter()
        .map(|(k, e)| json!({ "guess": k, "error": e.to_string() }))
        .collect();
    Ok(json!({
        "states": entries,
        "failures": failed,
        "confinement": {
            "interval": [i1.0, i1.1],
            "source": "convention: hull of the critical points of W widened by 1%",
        },
    }))
}

/// The `steady` subcommand: catalog of stationary states from the
/// configured guesses (or, when none are given, from `initial.chi` and the
/// constant critical points of `W`).
pub fn run_steady(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let out = opts.resolve_out(cfg.output_dir.as_deref());
    let mut files = Files::new(&out)?;
    let mut cfg = cfg.clone();
    if cfg.steady.guesses.is_empty() {
        cfg.steady.guesses.push(cfg.initial_chi.clone());
        for &c in &cfg.model.w.critical_points {
            cfg.steady.guesses.push(crate::config::FieldExpr::Constant(c));
        }
    }
    let mut assertions = Vec::new();
    let cat = steady_catalog(&cfg, &out, &mut files, &mut assertions)?;
    let n = cat["states"].as_array().map_or(0, Vec::len);
    let report = json!({
        "kind": "steady",
        "config": cfg.entries(),
        "steady_catalog": cat,
        "assertions": to_json(&assertions),
    });
    let report = files.write_report("diagnostics.json", report)?;
    opts.say(format!("steady: {n} distinct states written to {}", out.display()));
    Ok(Outcome {
        out_dir: out,
        report,
        assertions,
    })
}

/// `χ` snapshots `snap_<step>.pfld` next to a trace, in step order.
pub fn sibling_snapshots(dir: &Path) -> Result<Vec<Snapshot>> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snap_") && n.ends_with(".pfld"))
        })
        .collect();
    names.sort();
    names.iter().map(Snapshot::read).collect()
}

/// The `fit` subcommand: decay-rate fit of the `χ` snapshots stored next to
/// `trace` against `steady`, plus a Łojasiewicz estimate when the effective
/// `config.cfg` of the run is found beside the trace. Writes `fit.json`.
pub fn run_fit(trace: &Path, steady: &Path, opts: &RunOptions) -> Result<Outcome> {
    let dir = trace.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = opts.out.clone().unwrap_or_else(|| dir.clone());
    let mut files = Files::new(&out)?;
    let tr = EnergyTrace::read_csv(trace)?;
    let reference = Snapshot::read(steady)?;
    let snaps = sibling_snapshots(&dir)?;
    if snaps.is_empty() {
        return Err(Error::InsufficientSamples {
            admitted: 0,
            required: crate::diagnostics::MIN_FIT_POINTS,
        });
    }
    if snaps.iter().any(|s| s.grid != reference.grid) {
        return Err(Error::ConfigMismatch(
            "snapshots and steady state use different grids".into(),
        ));
    }
    let grid = Arc::new(reference.grid.clone());
    let chi_inf = Field::new(Arc::clone(&grid), reference.values.clone())?;
    let w = grid.weights();
    let t: Vec<f64> = snaps.iter().map(|s| s.time).collect();
    let dist: Vec<f64> = snaps
        .iter()
        .map(|s| {
            let diff: Vec<f64> = s.values.iter().zip(&reference.values).map(|(a, b)| a - b).collect();
            h_norm(&w, &diff)
        })
        .collect();

    let mut report = json!({
        "kind": "fit",
        "trace": trace.display().to_string(),
        "steady": steady.display().to_string(),
        "trace_rows": tr.len(),
        "snapshots": snaps.len(),
    });
    let cfg_path = dir.join("config.cfg");
    let mut zeta = None;
    let mut delta = None;
    if cfg_path.exists() {
        let cfg = parse_config(&cfg_path)?;
        delta = cfg.source.tags.delta;
        let series: Vec<(f64, &[f64])> = snaps.iter().map(|s| (s.time, s.values.as_slice())).collect();
        match field_samples(&series, &chi_inf, &cfg.model)
            .and_then(|s| estimate_from_samples(&s, cfg.diagnostics.eps_loj))
        {
            Ok(fit) => {
                zeta = Some(fit.zeta);
                report["lojasiewicz"] = to_json(&fit);
            }
            Err(e) => report["lojasiewicz"] = skipped(&e),
        }
    } else {
        report["lojasiewicz"] = json!({ "skipped": "no config.cfg next to the trace" });
    }
    let fit = fit_rate_series(&t, &dist, zeta, delta)?;
    report["rate_fit"] = to_json(&fit);
    let report = files.write_report("fit.json", report)?;
    opts.say(format!(
        "fit: beta = {}, C* = {:.4e}, {} points",
        fit.beta, fit.c_star, fit.points
    ));
    Ok(Outcome {
        out_dir: out,
        report,
        assertions: Vec::new(),
    })
}

/// One member of a sweep.
#[derive(Debug)]
pub struct SweepMember {
    pub value: String,
    pub out_dir: PathBuf,
    pub result: Result<Outcome>,
}

impl SweepMember {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(o) => o.exit_code(),
            Err(e) => exit_code(e),
        }
    }
}

/// The `sweep` subcommand: one run per value of `key`, each into
/// `<out>/<key>=<value>`, executed on `opts.threads` workers. Writes
/// `sweep.csv` with one line per member.
pub fn run_sweep(cfg: &ExperimentConfig, key: &str, values: &[String], opts: &RunOptions) -> Result<Vec<SweepMember>> {
    if !crate::config::KEYS.contains(&key) {
        return Err(Error::ValidationError(vec![format!("{key}: unknown key")]));
    }
    let out = opts.resolve_out(cfg.output_dir.as_deref());
    fs::create_dir_all(&out)?;
    // Validate every member before running any of them.
    let members: Vec<(String, ExperimentConfig)> = values
        .iter()
        .map(|v| cfg.with_override(key, v).map(|c| (v.clone(), c)))
        .collect::<Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let results: Vec<SweepMember> = pool.install(|| {
        members
            .par_iter()
            .map(|(v, c)| {
                let dir = out.join(format!("{key}={v}"));
                let member_opts = RunOptions {
                    out: Some(dir.clone()),
                    quiet: true,
                    ..opts.clone()
                };
                SweepMember {
                    value: v.clone(),
                    out_dir: dir,
                    result: run_experiment(c, &member_opts),
                }
            })
            .collect()
    });
    let mut csv = String::from("value,exit_code,verdict,energy_final,out_dir\n");
    for m in &results {
        let (verdict, energy) = match &m.result {
            Ok(o) => (
                o.report["omega_limit"]["verdict"].as_str().unwrap_or("").to_string(),
                o.report["summary"]["energy_final"].to_string(),
            ),
            Err(_) => ("ERROR".into(), String::new()),
        };
        writeln!(
            csv,
            "{},{},{verdict},{energy},{}",
            m.value,
            m.exit_code(),
            m.out_dir.display()
        )
        .unwrap();
        opts.say(format!("sweep {key}={}: exit {} {verdict}", m.value, m.exit_code()));
    }
    fs::write(out.join("sweep.csv"), csv)?;
    Ok(results)
}

/// The `validate` subcommand: parses the configuration and samples the
/// structural hypotheses on the model. Returns the hypothesis report.
pub fn validate_config(path: &Path, opts: &RunOptions) -> Result<Outcome> {
    let cfg = parse_config(path)?;
    let report = validate_hypotheses(&cfg.model, 2000);
    let mut assertions = Vec::new();
    for c in &report.checks {
        opts.say(format!("  {:<28} {:?}  {}", c.name, c.status, c.detail));
        assertions.push(Assertion {
            name: c.name.clone(),
            passed: c.status != crate::model::CheckStatus::Fail,
            detail: c.detail.clone(),
        });
    }
    for s in &report.suggestions {
        opts.say(format!("  suggestion: {s}"));
    }
    let kappa_rule = BTreeMap::from([("dt", cfg.run.dt), ("one_over_kappa", 1.0 / cfg.model.w.kappa)]);
    opts.say(format!("{}: configuration valid", path.display()));
    Ok(Outcome {
        out_dir: PathBuf::new(),
        report: json!({ "kind": "validate", "hypotheses": to_json(&report), "stability_rule": kappa_rule }),
        assertions,
    })
}
