//! Runs the three phases of a scenario as independent closed loops.

use std::thread;

use invmpc_core::{compute_metrics, run_phase, LogRow, PhaseId, PhaseMetrics, PhaseRun, ScenarioConfig};

use crate::error::{HarnessError, Result};

/// Solver-rate log of all three phases, phase A first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeriesLog {
    pub runs: Vec<PhaseRun>,
}

impl TimeSeriesLog {
    pub fn rows(&self) -> impl Iterator<Item = &LogRow> {
        self.runs.iter().flat_map(|r| r.rows.iter())
    }

    pub fn phase(&self, phase: PhaseId) -> Option<&PhaseRun> {
        self.runs.iter().find(|r| r.phase == phase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub phases: Vec<PhaseMetrics>,
    pub decisions: usize,
    pub held_samples: usize,
    pub degenerate_samples: usize,
    pub clamped_forecasts: usize,
}

impl MetricsReport {
    pub fn phase(&self, phase: PhaseId) -> &PhaseMetrics {
        self.phases.iter().find(|m| m.phase == phase).expect("all three phases are reported")
    }
}

pub fn compute_report(log: &TimeSeriesLog, cfg: &ScenarioConfig) -> Result<MetricsReport> {
    let edges = cfg.true_disturbance().edges();
    let phases = log
        .runs
        .iter()
        .map(|run| {
            compute_metrics(&run.rows, &edges, cfg.reference.amplitude, cfg.circuit.r_load_nominal, &cfg.metrics)
                .map_err(|e| HarnessError::Validation(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport {
        phases,
        decisions: log.runs.iter().map(|r| r.decisions).sum(),
        held_samples: log.runs.iter().map(|r| r.held_samples).sum(),
        degenerate_samples: log.runs.iter().map(|r| r.degenerate_samples).sum(),
        clamped_forecasts: log.runs.iter().map(|r| r.clamped_forecasts).sum(),
    })
}

/// Validate `cfg`, simulate phases A, B and C on separate threads, and
/// compute their metrics.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(TimeSeriesLog, MetricsReport)> {
    cfg.validate().map_err(|e| HarnessError::Validation(e.to_string()))?;
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = PhaseId::ALL.iter().map(|&phase| s.spawn(move || run_phase(cfg, phase))).collect();
        handles.into_iter().map(|h| h.join().expect("phase thread panicked")).collect()
    });
    let runs = results.into_iter().collect::<std::result::Result<Vec<_>, _>>().map_err(HarnessError::Numeric)?;
    let log = TimeSeriesLog { runs };
    let report = compute_report(&log, cfg)?;
    Ok((log, report))
}
