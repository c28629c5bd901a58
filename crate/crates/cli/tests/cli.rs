use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use tempfile::TempDir;

fn bopo() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bopo"));
    c.env_remove("BOPO_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bopo().args(args).output().unwrap()
}

fn config(dir: &Path, extra: &str) -> PathBuf {
    let out = dir.join("out");
    let path = dir.join("run.cfg");
    fs::write(&path, format!("output.dir = {}\n{extra}", out.display())).unwrap();
    path
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let o = run(&["solve", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = config(dir.path(), "problem.p = 7\n");
    let o = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2: p must lie in (3,6)"), "{}", stderr(&o));

    let cfg = config(dir.path(), "# comment\nsolver.grad_tol = 1e-6\nsolver.bogus = 3\n");
    let o = run(&["continue", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let cfg = config(dir.path(), "problem.p\n");
    assert_eq!(run(&["solve", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn verify_rejects_unknown_suites() {
    let dir = TempDir::new().unwrap();
    let o = bopo().env("BOPO_OUT", dir.path()).args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn verify_kernel_writes_a_report() {
    let dir = TempDir::new().unwrap();
    let o = bopo().env("BOPO_OUT", dir.path()).args(["verify", "kernel", "--seed", "7"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify_kernel.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["report"]["passed"], true);
    assert!(String::from_utf8_lossy(&o.stdout).lines().all(|l| l.starts_with("PASS") || l.starts_with("    ")));
}

#[test]
fn kernel_table_columns() {
    let o = run(&["kernel-table", "--a", "0.5", "--rmin", "0.01", "--rmax", "10", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,K,C,Y,dK,lapK");
    assert_eq!(lines.len(), 6);
    let row: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.01);
    assert!((row[1] - (row[2] - row[3])).abs() < 1e-12 * row[1]);
    let bad = run(&["kernel-table", "--a", "-1", "--rmin", "0.01", "--rmax", "10", "--n", "5"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn one_entry_schedule_matches_solve() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "continuation.schedule = 1\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = bopo().env("BOPO_OUT", &a).args(["solve", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bopo().env("BOPO_OUT", &b).args(["continue", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
    assert_eq!(files(&a), ["ground_state.json", "metadata.json", "plot.csv", "u.csv"]);
    for f in ["ground_state.json", "plot.csv", "u.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let trace = fs::read_to_string(b.join("trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(trace.lines().next().unwrap().starts_with("# config_hash="));
    assert!(files(&b).iter().all(|f| !f.contains(".tmp")));
}

#[test]
fn resume_after_interrupt_reproduces_a_fresh_run() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), "continuation.schedule = 1, 0.5, 0.25, 0.125\n");
    let cfg = cfg.to_str().unwrap();
    let (fresh, cut) = (dir.path().join("fresh"), dir.path().join("cut"));
    let o = bopo().env("BOPO_OUT", &fresh).args(["continue", cfg]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut child =
        bopo().env("BOPO_OUT", &cut).args(["continue", cfg]).stdout(Stdio::null()).stderr(Stdio::null()).spawn().unwrap();
    let checkpoint = cut.join("checkpoint.json");
    let clock = Instant::now();
    while !checkpoint.exists() && clock.elapsed() < Duration::from_secs(120) {
        std::thread::sleep(Duration::from_millis(5));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(checkpoint.exists());

    let o = bopo().env("BOPO_OUT", &cut).args(["continue", "--resume", cfg]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in files(&fresh).iter().filter(|f| *f != "metadata.json") {
        assert_eq!(fs::read(fresh.join(f)).unwrap(), fs::read(cut.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn resume_rejects_a_foreign_checkpoint() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let first = config(dir.path(), "continuation.schedule = 1\n");
    let o = bopo().env("BOPO_OUT", &out).args(["continue", first.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let second = config(dir.path(), "continuation.schedule = 1\nproblem.q = 0.5\n");
    let o = bopo().env("BOPO_OUT", &out).args(["continue", "--resume", second.to_str().unwrap()]).output().unwrap();
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("different configuration"), "{}", stderr(&o));
}
