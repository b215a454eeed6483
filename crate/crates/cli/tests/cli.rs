use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mirror-accel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_run(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--preset", "quadratic", "--d", "6", "--steps", "300", "--out", out];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn run_writes_traces_metadata_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path(), &["--plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["md.csv", "amd.csv", "amdr.csv", "metadata.json", "plot.svg"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let csv = std::fs::read_to_string(dir.path().join("amd.csv")).unwrap();
    assert!(csv.starts_with("k,f_gap,lyap_primal,lyap_dual\n"));
    assert_eq!(csv.lines().count(), 302);
    let meta = std::fs::read_to_string(dir.path().join("metadata.json")).unwrap();
    assert!(meta.contains("\"seed\"") && meta.contains("\"h\""), "{meta}");
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn identical_runs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(small_run(a.path(), &["--seed", "9"]).status.success());
    assert!(small_run(b.path(), &["--seed", "9"]).status.success());
    for name in ["md.csv", "amd.csv", "amdr.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\npreset = quadratic\nd = 4\nsteps = 50\nalgorithms = md\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--steps", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("d=4 steps=40"), "{text}");
    assert!(text.contains("md ") && !text.contains("amd "), "{text}");
}

#[test]
fn bad_config_line_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "preset = quadratic\nsteps\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["run", "--preset", "nope"],
        vec!["run", "--step-policy", "explicit:-1"],
        vec!["run", "--algorithms", "md,,amd"],
        vec!["run", "--bogus"],
        vec!["frobnicate"],
        vec!["rates", "--csv", "/nonexistent/trace.csv"],
        vec!["ode", "--system", "warp_drive"],
        vec!["run", "--preset", "quadratic", "--plot"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn divergent_run_exits_with_two_and_names_k() {
    let o = run(&[
        "run", "--preset", "quadratic", "--d", "5", "--steps", "2000", "--algorithms", "md",
        "--step-policy", "explicit:1e308",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("k = "), "{err}");
}

#[test]
fn rates_recovers_slope_of_written_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut csv = String::from("k,f_gap,lyap_primal,lyap_dual\n");
    for k in 0..=200u32 {
        let gap = 5.0 / f64::from(k.max(1)).powi(2);
        csv.push_str(&format!("{k},{gap:e},{gap:e},\n"));
    }
    std::fs::write(&path, csv).unwrap();
    let o = run(&["rates", "--csv", path.to_str().unwrap(), "--from", "10", "--to", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("slope -2.000000"), "{}", stdout(&o));
}

#[test]
fn ode_dump_has_header_and_reaches_t1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = run(&[
        "ode", "--system", "accelerated_dual", "--r", "2", "--t1", "5", "--tol", "1e-9", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,z1,z2,f_gap"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 5.0).abs() < 1e-12);
    assert!((last[1] + last[2] - 1.0).abs() < 1e-9);
}

#[test]
fn check_passes() {
    let o = run(&["check"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(!stdout(&o).contains("FAIL"));
}
