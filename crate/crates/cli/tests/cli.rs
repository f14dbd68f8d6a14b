use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kpiwave::harness::{read_diagnostics, read_snapshot_with_header};

fn kpiwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpiwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shipped(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    std::fs::read_to_string(p).unwrap()
}

/// Writes `text` with `[output] dir = out` appended; returns the config path.
fn config_with_output(dir: &Path, text: &str, out: &Path) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        format!("{text}\n[output]\ndir = \"{}\"\n", out.display()),
    )
    .unwrap();
    path
}

const SMALL_RUN: &str = r#"
experiment = "conservation-audit"
[grid]
nx = 64
ny = 64
lx = 40.0
ly = 40.0
[solver]
dt = 5e-3
t_end = 0.05
diagnostics_stride = 5
snapshot_stride = 5
"#;

#[test]
fn malformed_config_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let text = "experiment = \"conservation-audit\"\n[grid]\ndx = 0.1";
    let cfg = config_with_output(dir.path(), text, &out);
    for cmd in ["simulate", "check-invariants"] {
        let o = kpiwave(&[cmd, cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        let err = stderr(&o);
        assert!(
            err.contains("unknown field `dx`") && err.contains("line 3"),
            "{err}"
        );
        assert!(!out.exists());
    }
}

#[test]
fn missing_config_is_an_error() {
    let o = kpiwave(&["simulate", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/run.toml"));
}

#[test]
fn check_invariants_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chi");
    let cfg = config_with_output(dir.path(), &shipped("chi-audit.toml"), &out);
    let o = kpiwave(&["check-invariants", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.lines()
            .any(|l| l.starts_with("PASS chi3_momentum: measured")),
        "{text}"
    );
    assert!(out.join("summary.txt").exists() && out.join("chi.csv").exists());

    let strict = shipped("chi-audit.toml").replace("chi5_spread = 1e-6", "chi5_spread = 1e-300");
    let cfg = config_with_output(dir.path(), &strict, &dir.path().join("strict"));
    let o = kpiwave(&["check-invariants", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("FAIL chi5_spread")));
}

#[test]
fn functionals_of_a_snapshot_match_the_diagnostics_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let cfg = config_with_output(dir.path(), SMALL_RUN, &out);
    let o = kpiwave(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("t,M,E,Fpsi,Znorm,Xnorm,Hs0,Linf_u,Linf_ux,Linf_uy\n"));

    let rows = read_diagnostics(&out.join("diagnostics.csv")).unwrap();
    let o = kpiwave(&["functionals", out.join("snap_00001.kpi").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let printed = dir.path().join("row.csv");
    std::fs::write(&printed, stdout(&o)).unwrap();
    let row = read_diagnostics(&printed).unwrap();
    assert_eq!(row.len(), 1);
    assert_eq!(row[0].values(), rows[1].values());
}

#[test]
fn profile_writes_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.kpi");
    let o = kpiwave(&[
        "profile",
        "--kind",
        "zaitsev",
        "--alpha",
        "1",
        "--beta",
        "0.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, state) = read_snapshot_with_header(&path).unwrap();
    assert_eq!(header.frame_speed, 5.0);
    assert_eq!((header.nx, header.ny), (1024, 64));
    // Peak of the profile at α = 1, β = 0.5.
    assert!((state.v.max_abs() - 24.0).abs() < 1e-9);

    let o = kpiwave(&[
        "profile",
        "--kind",
        "zaitsev",
        "--beta",
        "1.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn probe_strichartz_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("probe.csv");
    let common = [
        "--nx",
        "32",
        "--ny",
        "32",
        "--samples",
        "4",
        "--nt",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ];
    let mut args = vec!["probe-strichartz", "--r", "2", "--eps", "0"];
    args.extend(common);
    assert_eq!(kpiwave(&args).status.code(), Some(0));
    let mut args = vec!["probe-strichartz", "--r", "inf", "--eps", "0.3"];
    args.extend(common);
    assert_eq!(kpiwave(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");

    let o = kpiwave(&["probe-strichartz", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_with_output(dir.path(), SMALL_RUN, &dir.path().join("t"));
    let o = Command::new(env!("CARGO_BIN_EXE_kpiwave"))
        .args(["simulate", cfg.to_str().unwrap()])
        .env("KPIWAVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("KPIWAVE_THREADS"), "{}", stderr(&o));
}
