use std::path::Path;
use std::process::{Command, Output};

fn invmpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invmpc")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_both_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = invmpc(&["run", "--mode", "opcm", "--case", "2", "--duration", "0.005", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("opcm_case2_timeseries.csv").is_file());
    assert!(dir.path().join("opcm_case2_summary.csv").is_file());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("item,case,opcm_a,opcm_b,opcm_c\n"));
}

#[test]
fn compare_prints_all_requested_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = invmpc(&["compare", "--cases", "1,3", "--modes", "odcm,opcm", "--duration", "0.003", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("item,case,odcm_a,odcm_b,odcm_c,opcm_a,opcm_b,opcm_c\n"));
    assert!(stdout.contains("\nmean_value_v,1,"));
    assert!(stdout.contains("\nmean_value_v,3,"));
    assert!(!stdout.contains(",2,"));
    assert_eq!(std::fs::read_to_string(dir.path().join("compare.csv")).unwrap(), stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(invmpc(&["run", "--mode", "odcm", "--case", "4"]).status.code(), Some(1));
    assert_eq!(invmpc(&["run", "--mode", "mpc", "--case", "1"]).status.code(), Some(1));
    assert_eq!(invmpc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(invmpc(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_configuration_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let cases = [
        ("typo.toml", "circuit.r_lod = 1.0\n"),
        ("ratio.toml", "controller.f_sol = 30000.0\n"),
        ("negative.toml", "circuit.c = -1.0\n"),
        ("load.toml", "disturbance.shifts = [{ t_start = 0.0, t_end = 0.01, delta_r = -150.0 }]\n"),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, text);
        let o =
            invmpc(&["run", "--mode", "odcm", "--case", "2", "--config", &cfg, "--duration", "0.001", "--out", out]);
        assert_eq!(o.status.code(), Some(1), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = invmpc(&["run", "--mode", "odcm", "--case", "1", "--duration", "-1", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let o = invmpc(&["run", "--mode", "odcm", "--case", "1", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numeric_breakdown_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "huge.toml", "circuit.u_dc = 1e308\n");
    let out = dir.path().join("out");
    let o = invmpc(&[
        "run",
        "--mode",
        "odcm",
        "--case",
        "1",
        "--config",
        &cfg,
        "--duration",
        "0.001",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numeric failure"));
}
