use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn glevy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glevy"))
        .args(args)
        .env_remove("GLEVY_THREADS")
        .output()
        .expect("binary runs")
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    glevy(&args)
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("experiment.cfg");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_lists_four_passed_conditions() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("validate", &configs().join("reference.cfg"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    let conditions = r["uncertainty"]["conditions"].as_array().unwrap();
    assert_eq!(conditions.len(), 4);
    assert!(conditions.iter().all(|c| c["passed"] == true));
    assert!(tmp.path().join("summary.txt").exists());
    assert!(tmp.path().join("metadata.json").exists());
}

#[test]
fn failed_validation_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[uncertainty]\nvol = 0.5\nellipticity = 0.5\n[coefficients]\npreset = pure-driver\n");
    let o = run("validate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report(&tmp.path().join("out"))["passed"], false);
}

#[test]
fn unknown_key_names_key_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[uncertainty]\nvol = 1.0\n\n[coefficients]\nsigmaa = 1\n");
    let o = run("validate", &cfg, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sigmaa") && err.contains("line 5"), "{err}");
}

#[test]
fn usage_errors_exit_with_64() {
    assert_eq!(glevy(&["expect"]).status.code(), Some(64));
    assert_eq!(glevy(&["frobnicate", "--config", "x"]).status.code(), Some(64));
    assert_eq!(glevy(&["expect", "--config", "/nonexistent/file.cfg"]).status.code(), Some(64));
    let cfg = configs().join("reference.cfg");
    assert_eq!(glevy(&["expect", "--config", cfg.to_str().unwrap(), "--paths", "many"]).status.code(), Some(64));
}

#[test]
fn reduce_classical_agrees_to_rounding() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("reduce-classical", &configs().join("classical.cfg"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(tmp.path());
    assert!(r["max_discrepancy"].as_f64().unwrap() <= 1e-12);
    let table = fs::read_to_string(tmp.path().join("classical.csv")).unwrap();
    assert_eq!(table.lines().count(), 257);
}

#[test]
fn reduce_classical_rejects_two_volatilities() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("classical.cfg")).unwrap().replace("vol = 1.0", "vol = 1.0\nvol = 0.5");
    let cfg = write_config(tmp.path(), &text);
    assert_eq!(run("reduce-classical", &cfg, &tmp.path().join("out"), &[]).status.code(), Some(2));
}

#[test]
fn check_pi_on_manufactured_preset_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("check-pi", &configs().join("manufactured.cfg"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(report(tmp.path())["max_abs_residual"].as_f64().unwrap() <= 0.02);
    let rows = fs::read_to_string(tmp.path().join("residuals.csv")).unwrap();
    assert_eq!(rows.lines().count(), 513);
}

#[test]
fn coarse_check_pi_misses_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        "check-pi",
        &configs().join("reference.cfg"),
        tmp.path(),
        &["--paths", "200", "--dt", "0.0078125"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(report(tmp.path())["passed"], false);
}

#[test]
fn reports_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("expressions.cfg");
    assert_eq!(run("expect", &cfg, a.path(), &["--threads", "1"]).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_glevy"))
        .args(["expect", "--config", cfg.to_str().unwrap(), "--out", b.path().to_str().unwrap()])
        .env("GLEVY_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    for f in ["report.json", "summary.txt", "scenarios.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(b.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 3);
}

#[test]
fn seed_override_changes_the_estimate() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("reference.cfg");
    run("expect", &cfg, a.path(), &["--paths", "300"]);
    run("expect", &cfg, b.path(), &["--paths", "300", "--seed", "99"]);
    assert_ne!(report(a.path())["value"], report(b.path())["value"]);
    assert_eq!(report(b.path())["numerics"]["seed"], 99);
}

#[test]
fn simulate_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("simulate", &configs().join("expressions.cfg"), tmp.path(), &["--paths", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let terminal = fs::read_to_string(tmp.path().join("terminal.csv")).unwrap();
    assert_eq!(terminal.lines().next(), Some("path,scenario,jumps,y1,x1"));
    assert_eq!(terminal.lines().count(), 41);
    assert!(tmp.path().join("path_0.csv").exists());
    assert!(tmp.path().join("events_0.csv").exists());
}

#[test]
fn explosive_drift_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[uncertainty]\nvol = 1.0\n[coefficients]\nb = x1^2\nsigma = 1\ny0 = 2\n[numerics]\nhorizon = 2\ndt = 0.01\npaths = 4\n",
    );
    let o = run("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pide_solve_matches_monte_carlo() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("pide-solve", &configs().join("pide.cfg"), tmp.path(), &["--paths", "4000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(tmp.path());
    assert!(r["monte_carlo"]["gap"].as_f64().unwrap() <= 0.05);
    let surface = fs::read_to_string(tmp.path().join("surface.csv")).unwrap();
    assert!(surface.starts_with("t,x,v\n"));
}

#[test]
fn unstable_pide_grid_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("pide.cfg")).unwrap().replace("compare = true", "steps = 10");
    let cfg = write_config(tmp.path(), &text);
    assert_eq!(run("pide-solve", &cfg, &tmp.path().join("out"), &[]).status.code(), Some(3));
}

#[test]
fn decomposition_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("decomposition.cfg");
    let o = run("decomp-check", &cfg, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(tmp.path())["verdict"], "nonzero");

    let text = fs::read_to_string(&cfg).unwrap().replace("expect = nonzero", "expect = zero");
    let wrong = write_config(tmp.path(), &text);
    assert_eq!(run("decomp-check", &wrong, &tmp.path().join("b"), &[]).status.code(), Some(4));

    let text = fs::read_to_string(&cfg).unwrap().replace("psi = 1\nexpect = nonzero", "expect = zero");
    let zero = write_config(tmp.path(), &text);
    assert_eq!(run("decomp-check", &zero, &tmp.path().join("c"), &[]).status.code(), Some(0));
}
