use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = "\
model.j = caginalp_j
model.W = quartic_W
model.lambda = linear_lambda(ell=1)
grid.extents = 1
grid.nodes = 24
initial.theta = sine(0.05)
initial.chi = cosine(0.3, 1)
run.dt = 1e-2
run.t_end = 2
run.snapshot_every = 20
steady.guesses = constant(1); constant(-1); constant(0)
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phaseflow"));
    c.env_remove("PHASEFLOW_OUT").arg("--quiet");
    c
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn listed_files_exist(dir: &Path, report: &Value) {
    let files = report["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let p = dir.join(f.as_str().unwrap());
        assert!(p.exists(), "{} missing", p.display());
    }
}

#[test]
fn shipped_caginalp_example_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = example("caginalp_quartic.cfg");
    let o = run(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path(), "diagnostics.json");
    assert_eq!(r["omega_limit"]["verdict"], "CONVERGED");
    listed_files_exist(tmp.path(), &r);
}

#[test]
fn shipped_equilibrium_and_divergent_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let eq = tmp.path().join("eq");
    let o = run(&["run", example("equilibrium.cfg").to_str().unwrap()], &eq);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(eq.join("trace.csv")).unwrap();
    let energies: Vec<&str> = trace.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(energies.len() > 2 && energies.iter().all(|e| *e == energies[0]));

    let div = tmp.path().join("div");
    let o = run(&["run", example("divergent.cfg").to_str().unwrap()], &div);
    assert_eq!(code(&o), 3);
    assert!(report(&div, "diagnostics.json")["error"].is_string());
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let unstable = write_cfg(
        tmp.path(),
        "dt.cfg",
        &SMALL
            .replace("run.dt = 1e-2", "run.dt = 10")
            .replace("run.t_end = 2", "run.t_end = 20"),
    );
    let o = run(&["run", unstable.to_str().unwrap()], &tmp.path().join("a"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt <= 1/kappa"));

    let unknown = write_cfg(tmp.path(), "w.cfg", &SMALL.replace("quartic_W", "sextic_W"));
    let o = run(&["validate", unknown.to_str().unwrap()], &tmp.path().join("b"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sextic_W"));

    let o = run(
        &["run", tmp.path().join("missing.cfg").to_str().unwrap()],
        &tmp.path().join("c"),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let mut traces = Vec::new();
    for name in ["one", "two"] {
        let out = tmp.path().join(name);
        let o = run(&["run", cfg.to_str().unwrap()], &out);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        listed_files_exist(&out, &report(&out, "diagnostics.json"));
        assert!(out.join("steady").join("steady_catalog.csv").exists());
        traces.push(fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn steady_then_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "fit.cfg",
        &SMALL
            .replace("run.t_end = 2", "run.t_end = 30")
            .replace("cosine(0.3, 1)", "constant(0.6)"),
    );
    let steady = tmp.path().join("steady");
    let o = run(&["steady", cfg.to_str().unwrap()], &steady);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&steady, "diagnostics.json");
    listed_files_exist(&steady, &r);
    assert!(r["steady_catalog"]["states"].as_array().unwrap().len() >= 3);

    let runs = tmp.path().join("run");
    let o = run(&["run", cfg.to_str().unwrap()], &runs);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reference = runs.join("steady_ref.pfld");
    assert!(reference.exists());
    let o = bin()
        .args([
            "fit",
            runs.join("trace.csv").to_str().unwrap(),
            reference.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit = report(&runs, "fit.json");
    assert!(fit["rate_fit"].is_object());
}

#[test]
fn sweep_runs_every_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let out = tmp.path().join("sweep");
    let o = bin()
        .args([
            "--threads",
            "2",
            "sweep",
            cfg.to_str().unwrap(),
            "run.dt",
            "1e-2",
            "5e-3",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("run.dt=1e-2").join("trace.csv").exists());
    assert!(out.join("run.dt=5e-3").join("trace.csv").exists());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let o = run(
        &["sweep", cfg.to_str().unwrap(), "run.nonsense", "1"],
        &tmp.path().join("bad"),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_reports_hypotheses() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let out = tmp.path().join("v");
    let o = run(&["validate", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn environment_fallback_for_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.cfg", SMALL);
    let env_out = tmp.path().join("from_env");
    let o = bin()
        .env("PHASEFLOW_OUT", &env_out)
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_out.join("trace.csv").exists());

    // output.dir is relative to the working directory.
    let cfg = write_cfg(tmp.path(), "dir.cfg", &format!("{SMALL}output.dir = from_cfg\n"));
    let o = bin()
        .current_dir(tmp.path())
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("from_cfg").join("trace.csv").exists());
}
