//! Load-shift disturbance sampling and recursive least-squares forecasting.
//!
//! The disturbance series `w(t)` is the difference between the load
//! resistance seen by the plant and the one the nominal model predicts. The
//! forecaster regresses the next `n_e` samples on the `m` samples before them:
//!
//! ```text
//! u(t)   = (w(t-m-n_e+1), ..., w(t-n_e))     regressor
//! d(t)   = (w(t-n_e+1),   ..., w(t))         target
//! u_e(t) = (w(t-m+1),     ..., w(t))         forecast input
//!
//! pi = u' P,  gamma = lambda + pi u,  k = pi' / gamma,  alpha = d - r u
//! r <- r + alpha k',  P <- (P - k pi) / lambda,  w_hat = r u_e
//! ```

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::OutputSignals;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlsConfig {
    /// Forgetting factor in (0, 1].
    pub lambda: f64,
    /// History length.
    pub m: usize,
    /// Forecast length.
    pub n_e: usize,
    /// Initial inverse-correlation scale, `P(0) = delta * I`.
    pub delta: f64,
    /// Zero-crossing band on the load current (A).
    pub epsilon: f64,
    /// Sampling frequency (Hz).
    pub f_e: f64,
}

impl RlsConfig {
    pub fn baseline() -> Self {
        Self { lambda: 1.0, m: 10, n_e: 5, delta: 1e-3, epsilon: 0.1, f_e: 20_000.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig("forgetting factor must lie in (0, 1]"));
        }
        if self.n_e == 0 || self.m < self.n_e {
            return Err(Error::InvalidConfig("RLS needs m >= n_e >= 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("RLS delta must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("zero-crossing band must be positive"));
        }
        if !(self.f_e > 0.0 && self.f_e.is_finite()) {
            return Err(Error::InvalidConfig("RLS sampling frequency must be positive"));
        }
        Ok(())
    }
}

impl Default for RlsConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Outcome of one disturbance sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceSample {
    Fresh(f64),
    /// Load current inside the zero-crossing band; last effective value kept.
    Held(f64),
    /// Predicted load current was exactly zero outside the band; last
    /// effective value kept.
    Degenerate(f64),
}

impl DisturbanceSample {
    pub fn value(self) -> f64 {
        match self {
            DisturbanceSample::Fresh(v) | DisturbanceSample::Held(v) | DisturbanceSample::Degenerate(v) => v,
        }
    }
}

/// Measured minus predicted load resistance, with the zero-crossing hold.
pub fn sample_disturbance(
    measured: &OutputSignals,
    predicted: &OutputSignals,
    last_effective: f64,
    epsilon: f64,
) -> DisturbanceSample {
    if measured.i_o.abs() <= epsilon {
        return DisturbanceSample::Held(last_effective);
    }
    if predicted.i_o == 0.0 {
        return DisturbanceSample::Degenerate(last_effective);
    }
    let w = measured.v_load / measured.i_o - predicted.v_load / predicted.i_o;
    if w.is_finite() {
        DisturbanceSample::Fresh(w)
    } else {
        DisturbanceSample::Degenerate(last_effective)
    }
}

/// Estimator memory for one phase.
#[derive(Debug, Clone)]
pub struct RlsState {
    cfg: RlsConfig,
    /// `n_e x m`, row-major.
    r: Vec<f64>,
    /// `m x m`, row-major.
    p: Vec<f64>,
    history: VecDeque<f64>,
    forecast: Vec<f64>,
    pub last_effective_sample: f64,
    samples_seen: usize,
}

impl RlsState {
    pub fn new(cfg: RlsConfig) -> Result<Self> {
        cfg.validate()?;
        let m = cfg.m;
        let mut p = vec![0.0; m * m];
        for i in 0..m {
            p[i * m + i] = cfg.delta;
        }
        Ok(Self {
            cfg,
            r: vec![0.0; cfg.n_e * m],
            p,
            history: VecDeque::with_capacity(m + cfg.n_e),
            forecast: vec![0.0; cfg.n_e],
            last_effective_sample: 0.0,
            samples_seen: 0,
        })
    }

    pub fn config(&self) -> &RlsConfig {
        &self.cfg
    }

    pub fn samples_seen(&self) -> usize {
        self.samples_seen
    }

    /// Coefficient matrix, `n_e x m` row-major.
    pub fn coefficients(&self) -> &[f64] {
        &self.r
    }

    /// Inverse-correlation matrix, `m x m` row-major.
    pub fn inverse_correlation(&self) -> &[f64] {
        &self.p
    }

    pub fn forecast(&self) -> &[f64] {
        &self.forecast
    }

    /// First `n` elements of the latest forecast; zeros before warm-up.
    pub fn forecast_for_controller(&self, n: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.forecast.iter().copied().take(n).collect();
        out.resize(n, 0.0);
        out
    }

    /// Append a sample and, once `m + n_e` samples exist, run one recursion.
    /// Returns the refreshed `n_e`-step forecast.
    pub fn update(&mut self, sample: f64) -> Result<&[f64]> {
        if !sample.is_finite() {
            return Err(Error::Numeric("non-finite disturbance sample"));
        }
        let (m, n_e) = (self.cfg.m, self.cfg.n_e);
        if self.history.len() == m + n_e {
            self.history.pop_front();
        }
        self.history.push_back(sample);
        self.samples_seen += 1;
        if self.samples_seen < m + n_e {
            return Ok(&self.forecast);
        }

        let window: Vec<f64> = self.history.iter().copied().collect();
        let u = &window[..m];
        let d = &window[m..];
        let u_e = &window[n_e..];

        let mut pi = vec![0.0; m];
        for (j, pj) in pi.iter_mut().enumerate() {
            *pj = (0..m).map(|i| u[i] * self.p[i * m + j]).sum();
        }
        let gamma = self.cfg.lambda + pi.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Numeric("RLS gain denominator is not positive"));
        }
        let k: Vec<f64> = pi.iter().map(|v| v / gamma).collect();

        for i in 0..n_e {
            let row = &mut self.r[i * m..(i + 1) * m];
            let predicted: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            let alpha = d[i] - predicted;
            for (rij, kj) in row.iter_mut().zip(&k) {
                *rij += alpha * kj;
            }
        }
        let inv_lambda = 1.0 / self.cfg.lambda;
        for i in 0..m {
            for j in 0..m {
                let v = &mut self.p[i * m + j];
                *v = (*v - k[i] * pi[j]) * inv_lambda;
            }
        }

        for (i, f) in self.forecast.iter_mut().enumerate() {
            *f = self.r[i * m..(i + 1) * m].iter().zip(u_e).map(|(a, b)| a * b).sum();
        }
        Ok(&self.forecast)
    }
}
