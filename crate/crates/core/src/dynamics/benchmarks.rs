//! Standard reservoir-computing benchmark signals.

use super::TimeSeries;
use crate::error::{config, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Second-order NARMA input/output model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarmaConfig {
    /// Input period `T`; the three frequencies are 2.11/T, 3.73/T, 4.11/T.
    pub period: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub gamma_n: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Default for NarmaConfig {
    fn default() -> Self {
        let period = 100.0;
        Self { period, alpha_n: 2.11 / period, beta_n: 3.73 / period, gamma_n: 4.11 / period, y0: 0.19, y1: 0.19 }
    }
}

impl NarmaConfig {
    pub fn input(&self, k: usize) -> f64 {
        let k = k as f64;
        0.1 * ((2.0 * PI * self.alpha_n * k).sin()
            * (2.0 * PI * self.beta_n * k).sin()
            * (2.0 * PI * self.gamma_n * k).sin()
            + 1.0)
    }
}

/// `steps` inputs `u_k` and outputs `y_k`, `k = 0..steps`.
pub fn narma2_series(cfg: &NarmaConfig, steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if steps < 2 {
        return Err(config("NARMA-2 needs at least two steps"));
    }
    let u: Vec<f64> = (0..steps).map(|k| cfg.input(k)).collect();
    let mut y = Vec::with_capacity(steps);
    y.push(cfg.y0);
    y.push(cfg.y1);
    for k in 1..steps - 1 {
        let next = 0.4 * y[k] + 0.4 * y[k] * y[k - 1] + 0.6 * u[k].powi(3) + 0.1;
        y.push(next);
    }
    Ok((u, y))
}

/// Mackey-Glass delay equation integrated with RK4 on a fixed grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MackeyGlassConfig {
    pub alpha_m: f64,
    pub beta_m: f64,
    pub gamma_m: f64,
    pub delay: f64,
    pub exponent: f64,
    pub dt: f64,
    /// Constant value of `x` for `tau <= 0`, including `x(0)`.
    pub history: f64,
}

impl Default for MackeyGlassConfig {
    fn default() -> Self {
        Self { alpha_m: 1.0, beta_m: 2.0, gamma_m: 1.0, delay: 2.0, exponent: 10.0, dt: 0.1, history: 0.5 }
    }
}

impl MackeyGlassConfig {
    /// Delay measured in steps; errors unless `delay / dt` is an integer.
    pub fn delay_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.delay >= 0.0) {
            return Err(config("Mackey-Glass needs dt > 0 and delay >= 0"));
        }
        let ratio = self.delay / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
            return Err(config(format!("delay / dt = {ratio} is not an integer")));
        }
        Ok(rounded as usize)
    }

    fn rhs(&self, x: f64, delayed: f64) -> f64 {
        let an = self.alpha_m.powf(self.exponent);
        self.beta_m * an * delayed / (an + delayed.powf(self.exponent)) - self.gamma_m * x
    }
}

/// `steps + 1` samples of `x` (single column `x`).
pub fn mackey_glass_series(cfg: &MackeyGlassConfig, steps: usize) -> Result<TimeSeries> {
    let lag = cfg.delay_steps()?;
    let h = cfg.dt;
    let mut xs = Vec::with_capacity(steps + 1);
    xs.push(cfg.history);
    for k in 0..steps {
        let x = xs[k];
        let delayed = if k >= lag { xs[k - lag] } else { cfg.history };
        let k1 = cfg.rhs(x, delayed);
        let k2 = cfg.rhs(x + 0.5 * h * k1, delayed);
        let k3 = cfg.rhs(x + 0.5 * h * k2, delayed);
        let k4 = cfg.rhs(x + h * k3, delayed);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(crate::Error::Diverged { step: k + 1 });
        }
        xs.push(next);
    }
    let mut ts = TimeSeries::new(h, vec!["x".into()])?;
    for x in xs {
        ts.push(&[x])?;
    }
    Ok(ts)
}
