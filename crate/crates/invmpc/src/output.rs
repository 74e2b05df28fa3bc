//! CSV time series, per-run summaries, and the mode/case comparison table.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use invmpc_core::{Case, ControlMode, PhaseId, PhaseMetrics};

use crate::error::{HarnessError, Result};
use crate::scenario::{MetricsReport, TimeSeriesLog};

pub const TIMESERIES_HEADER: &str =
    "t,phase,sigma,s_up,s_down,d1,d2,d3,x1,x2,x3,v_o,v_ref,error,r_load_true,w_sample,w_hat_first";

/// One row per solver sample, phase A rows first. Floats use the shortest
/// representation that round-trips; duty columns are empty outside PWM mode.
pub fn write_timeseries<W: Write>(mut w: W, log: &TimeSeriesLog) -> io::Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for r in log.rows() {
        let (d1, d2, d3) = match r.duty {
            Some(d) => (d.d1().to_string(), d.d2().to_string(), d.d3().to_string()),
            None => Default::default(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.phase.label(),
            r.sigma.value(),
            r.switches.s_up() as u8,
            r.switches.s_down() as u8,
            d1,
            d2,
            d3,
            r.x[0],
            r.x[1],
            r.x[2],
            r.v_o,
            r.v_ref,
            r.error,
            r.r_load_true,
            r.w_sample,
            r.w_hat_first,
        )?;
    }
    Ok(())
}

fn fmt_settling(m: &PhaseMetrics) -> String {
    match m.settling_time {
        Some(t) => format!("{:.4}", t * 1e3),
        None => "not-settled".to_string(),
    }
}

/// Table rows `(label, [A, B, C])` for one scenario.
fn metric_rows(case: Case, report: &MetricsReport) -> Vec<(String, [String; 3])> {
    let per_phase = |f: &dyn Fn(&PhaseMetrics) -> String| -> [String; 3] { PhaseId::ALL.map(|p| f(report.phase(p))) };
    let mut rows = vec![
        ("initial_value_v".to_string(), per_phase(&|m| format!("{:.4}", m.initial_error))),
        ("settling_time_ms".to_string(), per_phase(&fmt_settling)),
        ("mean_value_v".to_string(), per_phase(&|m| format!("{:.4}", m.mean_abs_error))),
    ];
    if case == Case::NoDisturbance {
        rows.push(("max_value_v".to_string(), per_phase(&|m| format!("{:.4}", m.max_abs_error))));
    } else {
        let edges = report.phases[0].edge_overshoots.len();
        for i in 0..edges {
            let t = report.phases[0].edge_overshoots[i].t_edge;
            rows.push((format!("overshoot_at_{t}s_v"), per_phase(&|m| format!("{:.4}", m.edge_overshoots[i].value))));
        }
    }
    rows.push(("std_dev_v".to_string(), per_phase(&|m| format!("{:.4}", m.std_dev_error))));
    if case == Case::Adaptive {
        let edges = report.phases[0].rls_overshoots.len();
        for i in 0..edges {
            let t = report.phases[0].rls_overshoots[i].t_edge;
            rows.push((
                format!("rls_error_peak_at_{t}s_ohm"),
                per_phase(&|m| format!("{:.4}", m.rls_overshoots[i].value)),
            ));
        }
    }
    rows
}

/// Per-run summary: a `#`-commented provenance block with the exact
/// configuration, then one CSV row per metric.
pub fn write_summary<W: Write>(
    mut w: W,
    mode: ControlMode,
    case: Case,
    config_toml: &str,
    report: &MetricsReport,
) -> io::Result<()> {
    writeln!(w, "# mode = {}", mode.label())?;
    writeln!(w, "# case = {}", case.number())?;
    writeln!(w, "# decisions = {}", report.decisions)?;
    writeln!(w, "# held_samples = {}", report.held_samples)?;
    writeln!(w, "# degenerate_samples = {}", report.degenerate_samples)?;
    writeln!(w, "# clamped_forecasts = {}", report.clamped_forecasts)?;
    writeln!(w, "# --- config ---")?;
    for line in config_toml.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "item,case,phase_a,phase_b,phase_c")?;
    for (label, [a, b, c]) in metric_rows(case, report) {
        writeln!(w, "{label},{},{a},{b},{c}", case.number())?;
    }
    Ok(())
}

/// Write `<stem>_timeseries.csv` and `<stem>_summary.csv` into `dir`.
pub fn emit_csv(
    log: &TimeSeriesLog,
    report: &MetricsReport,
    mode: ControlMode,
    case: Case,
    config_toml: &str,
    dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let ts_path = dir.join(format!("{stem}_timeseries.csv"));
    let summary_path = dir.join(format!("{stem}_summary.csv"));

    let write_file = |path: &Path, f: &dyn Fn(&mut io::BufWriter<fs::File>) -> io::Result<()>| {
        let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut buf = io::BufWriter::new(file);
        f(&mut buf).and_then(|_| buf.flush()).map_err(|e| HarnessError::io(path, e))
    };
    write_file(&ts_path, &|w| write_timeseries(w, log))?;
    write_file(&summary_path, &|w| write_summary(w, mode, case, config_toml, report))?;
    Ok((ts_path, summary_path))
}

/// Side-by-side table of every metric, one row per (item, case), with
/// A/B/C columns per mode. Missing mode/case combinations print as `-`.
pub fn write_compare_table<W: Write>(mut w: W, results: &[(ControlMode, Case, MetricsReport)]) -> io::Result<()> {
    let modes: Vec<ControlMode> = [ControlMode::Odcm, ControlMode::Opcm]
        .into_iter()
        .filter(|m| results.iter().any(|(rm, _, _)| rm == m))
        .collect();
    let mut cases: Vec<Case> = results.iter().map(|(_, c, _)| *c).collect();
    cases.sort();
    cases.dedup();

    let mut header = String::from("item,case");
    for m in &modes {
        for p in PhaseId::ALL {
            let _ = write!(header, ",{}_{}", m.label(), p.label().to_lowercase());
        }
    }
    writeln!(w, "{header}")?;
    for case in cases {
        // Row labels come from whichever mode ran this case first.
        let Some((_, _, first)) = results.iter().find(|(_, c, _)| *c == case) else { continue };
        let labels: Vec<String> = metric_rows(case, first).into_iter().map(|(l, _)| l).collect();
        for label in labels {
            let mut line = format!("{label},{}", case.number());
            for m in &modes {
                let cells = results
                    .iter()
                    .find(|(rm, rc, _)| rm == m && *rc == case)
                    .and_then(|(_, _, r)| metric_rows(case, r).into_iter().find(|(l, _)| *l == label))
                    .map(|(_, v)| v)
                    .unwrap_or_else(|| ["-".into(), "-".into(), "-".into()]);
                for c in cells {
                    let _ = write!(line, ",{c}");
                }
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}
