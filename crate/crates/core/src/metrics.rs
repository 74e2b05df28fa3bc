//! Tracking-error statistics of a closed-loop run.
//!
//! Settling: the first sample time after which `|error|` stays below
//! `settle_fraction * amplitude` for at least `hold_window`. Steady-state
//! mean, standard deviation and maximum are taken over `|error|` from the
//! settling time to the end of the run; a run that never settles uses the
//! samples after `2 * hold_window` instead.

use alloc::vec::Vec;

use crate::circuit::PhaseId;
use crate::closed_loop::LogRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    /// Settling threshold as a fraction of the reference amplitude.
    pub settle_fraction: f64,
    /// Time the error must stay under the threshold (s).
    pub hold_window: f64,
    /// Window after each disturbance edge searched for the overshoot (s).
    pub edge_window: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { settle_fraction: 0.05, hold_window: 0.5e-3, edge_window: 5e-3 }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.settle_fraction, self.hold_window, self.edge_window].iter().all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("metric thresholds and windows must be positive"))
        }
    }
}

/// Peak of a signal within the window after one disturbance edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePeak {
    pub t_edge: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMetrics {
    pub phase: PhaseId,
    pub initial_error: f64,
    /// `None` when the error never stays under the threshold.
    pub settling_time: Option<f64>,
    /// Start of the steady-state window.
    pub stats_start: f64,
    pub mean_abs_error: f64,
    pub std_dev_error: f64,
    pub max_abs_error: f64,
    /// Largest `|error|` after each disturbance edge.
    pub edge_overshoots: Vec<EdgePeak>,
    /// Largest-magnitude signed forecast error `w_hat - w_true` after each edge.
    pub rls_overshoots: Vec<EdgePeak>,
}

/// First time after which `abs_error` stays below `threshold` for `hold`.
/// A run of sub-threshold samples that reaches the end of the data counts.
pub fn settling_time(times: &[f64], abs_error: &[f64], threshold: f64, hold: f64) -> Option<f64> {
    let mut start: Option<usize> = None;
    for (i, (&t, &e)) in times.iter().zip(abs_error).enumerate() {
        if e < threshold {
            let s = *start.get_or_insert(i);
            if t - times[s] >= hold * (1.0 - 1e-9) {
                return Some(times[s]);
            }
        } else {
            start = None;
        }
    }
    start.map(|s| times[s])
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

pub fn compute_metrics(
    rows: &[LogRow],
    edges: &[f64],
    amplitude: f64,
    r_load_nominal: f64,
    cfg: &MetricsConfig,
) -> Result<PhaseMetrics> {
    let first = rows.first().ok_or(Error::InvalidConfig("cannot compute metrics of an empty log"))?;
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let abs_err: Vec<f64> = rows.iter().map(|r| r.error.abs()).collect();

    let threshold = cfg.settle_fraction * amplitude;
    let settling = settling_time(&times, &abs_err, threshold, cfg.hold_window);
    let stats_start = settling.unwrap_or(2.0 * cfg.hold_window);
    let steady: Vec<f64> = times.iter().zip(&abs_err).filter(|(t, _)| **t >= stats_start).map(|(_, e)| *e).collect();
    let (mean, std) = mean_std(&steady);
    let max = steady.iter().copied().fold(0.0, f64::max);

    let t_end = times[times.len() - 1];
    let mut edge_overshoots = Vec::new();
    let mut rls_overshoots = Vec::new();
    for &edge in edges.iter().filter(|e| **e <= t_end) {
        let window = rows.iter().filter(|r| r.t >= edge && r.t < edge + cfg.edge_window);
        let mut peak_err = 0.0_f64;
        let mut peak_w = 0.0_f64;
        for r in window {
            peak_err = peak_err.max(r.error.abs());
            let w_err = r.w_hat_first - (r.r_load_true - r_load_nominal);
            if w_err.abs() > peak_w.abs() {
                peak_w = w_err;
            }
        }
        edge_overshoots.push(EdgePeak { t_edge: edge, value: peak_err });
        rls_overshoots.push(EdgePeak { t_edge: edge, value: peak_w });
    }

    Ok(PhaseMetrics {
        phase: first.phase,
        initial_error: first.error.abs(),
        settling_time: settling,
        stats_start,
        mean_abs_error: mean,
        std_dev_error: std,
        max_abs_error: max,
        edge_overshoots,
        rls_overshoots,
    })
}
