use std::path::Path;

use invmpc::output::TIMESERIES_HEADER;
use invmpc::{emit_csv, run_scenario, write_timeseries, FileConfig, TimeSeriesLog};
use invmpc_core::{Case, ControlMode, PhaseId};

fn short_config(duration: f64) -> FileConfig {
    let mut cfg = FileConfig::default();
    cfg.run.duration = duration;
    cfg
}

fn emit(dir: &Path, mode: ControlMode, case: Case) -> (Vec<u8>, Vec<u8>) {
    let file = short_config(0.025);
    let scenario = file.to_scenario(mode, case).unwrap();
    let (log, report) = run_scenario(&scenario).unwrap();
    let (ts, summary) = emit_csv(&log, &report, mode, case, &file.to_toml(), dir, "run").unwrap();
    (std::fs::read(ts).unwrap(), std::fs::read(summary).unwrap())
}

#[test]
fn reruns_are_byte_identical() {
    for mode in [ControlMode::Odcm, ControlMode::Opcm] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(emit(a.path(), mode, Case::Adaptive), emit(b.path(), mode, Case::Adaptive));
    }
}

#[test]
fn empty_log_writes_only_the_header() {
    let mut out = Vec::new();
    write_timeseries(&mut out, &TimeSeriesLog::default()).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), format!("{TIMESERIES_HEADER}\n"));
}

#[test]
fn timeseries_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let (ts, _) = emit(dir.path(), ControlMode::Opcm, Case::Disturbed);
    let text = String::from_utf8(ts).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TIMESERIES_HEADER));
    let columns = TIMESERIES_HEADER.split(',').count();
    let mut last_t: Option<(String, f64)> = None;
    let mut phases_seen = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), columns, "{line}");
        let t: f64 = cells[0].parse().unwrap();
        let phase = cells[1].to_string();
        if phases_seen.last() != Some(&phase) {
            phases_seen.push(phase.clone());
        } else if let Some((p, prev)) = &last_t {
            assert_eq!(p, &phase);
            assert!(t > *prev, "time must increase within a phase");
        }
        assert!(!(cells[3] == "1" && cells[4] == "1"));
        // The initial row precedes the first decision and carries no duty.
        if t > 0.0 {
            let duty: f64 = cells[5..8].iter().map(|c| c.parse::<f64>().unwrap()).sum();
            assert!((duty - 1.0).abs() < 1e-12);
        }
        last_t = Some((phase, t));
    }
    let labels: Vec<String> = PhaseId::ALL.iter().map(|p| p.label().to_string()).collect();
    assert_eq!(phases_seen, labels);
}

#[test]
fn summary_carries_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let (_, summary) = emit(dir.path(), ControlMode::Odcm, Case::Adaptive);
    let text = String::from_utf8(summary).unwrap();
    let config: String = text
        .lines()
        .skip_while(|l| *l != "# --- config ---")
        .skip(1)
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or("")))
        .collect();
    let parsed = FileConfig::from_toml_str(&config, Path::new("summary")).unwrap();
    assert_eq!(parsed, short_config(0.025));
    assert!(text.contains("\ninitial_value_v,3,190.0000,190.0000,380.0000\n"));
    assert!(text.contains("rls_error_peak_at_0.02s_ohm,3,"));
}
