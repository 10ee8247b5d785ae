use super::{TimeSeries, VectorField};
use crate::error::{contract, Error, Result};
use serde::{Deserialize, Serialize};

pub(crate) struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    pub(crate) fn new(dim: usize) -> Self {
        Self { k1: vec![0.0; dim], k2: vec![0.0; dim], k3: vec![0.0; dim], k4: vec![0.0; dim], tmp: vec![0.0; dim] }
    }
}

pub(crate) fn rk4_step_into(field: &dyn VectorField, x: &mut [f64], h: f64, s: &mut Rk4Scratch) {
    let n = x.len();
    field.eval(x, &mut s.k1);
    for i in 0..n {
        s.tmp[i] = x[i] + 0.5 * h * s.k1[i];
    }
    field.eval(&s.tmp, &mut s.k2);
    for i in 0..n {
        s.tmp[i] = x[i] + 0.5 * h * s.k2[i];
    }
    field.eval(&s.tmp, &mut s.k3);
    for i in 0..n {
        s.tmp[i] = x[i] + h * s.k3[i];
    }
    field.eval(&s.tmp, &mut s.k4);
    for i in 0..n {
        x[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }
}

/// One classical RK4 step, returning the new state.
pub fn rk4_step(field: &dyn VectorField, x: &[f64], h: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    rk4_step_into(field, &mut out, h, &mut Rk4Scratch::new(x.len()));
    out
}

/// Fixed-step RK4; the result has `steps + 1` rows starting with `x0`.
pub fn rk4_integrate(field: &dyn VectorField, x0: &[f64], dt: f64, steps: usize) -> Result<TimeSeries> {
    if x0.len() != field.dim() {
        return Err(contract(format!("initial state has {} entries, field expects {}", x0.len(), field.dim())));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(contract(format!("time step must be positive, got {dt}")));
    }
    if steps == 0 {
        return Err(contract("at least one step is required"));
    }
    let mut ts = TimeSeries::new(dt, field.labels())?;
    let mut x = x0.to_vec();
    let mut scratch = Rk4Scratch::new(x.len());
    ts.push(&x)?;
    for step in 1..=steps {
        rk4_step_into(field, &mut x, dt, &mut scratch);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step });
        }
        ts.push(&x)?;
    }
    Ok(ts)
}

/// Settings for the two-trajectory largest-exponent estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub dt: f64,
    /// Steps integrated before averaging starts.
    pub transient_steps: usize,
    /// Total steps, transient included.
    pub total_steps: usize,
    /// Steps between renormalizations of the separation.
    pub renorm_interval: usize,
    /// Initial separation magnitude.
    pub perturbation: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self { dt: 0.02, transient_steps: 10_000, total_steps: 200_000, renorm_interval: 10, perturbation: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Per unit of (rescaled) time.
    pub lambda1: f64,
    pub transient_steps: usize,
    pub renorm_interval: usize,
}

/// Largest Lyapunov exponent by the Benettin two-trajectory method.
///
/// A reference and a perturbed copy are integrated side by side; every
/// `renorm_interval` steps the separation is rescaled back to
/// `perturbation` and its log growth accumulated. Growth during the
/// transient is discarded.
pub fn largest_lyapunov(field: &dyn VectorField, x0: &[f64], cfg: &LyapunovConfig) -> Result<LyapunovResult> {
    if cfg.renorm_interval == 0 {
        return Err(contract("renormalization interval must be at least 1"));
    }
    if cfg.total_steps <= cfg.transient_steps {
        return Err(contract("total_steps must exceed transient_steps"));
    }
    if !(cfg.perturbation > 0.0 && cfg.dt > 0.0) {
        return Err(contract("perturbation and dt must be positive"));
    }
    if x0.len() != field.dim() {
        return Err(contract("initial state dimension does not match the field"));
    }
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    // perturb along the diagonal
    let d0 = cfg.perturbation;
    let per = d0 / (dim as f64).sqrt();
    y.iter_mut().for_each(|v| *v += per);

    let mut sx = Rk4Scratch::new(dim);
    let mut sy = Rk4Scratch::new(dim);
    let mut log_sum = 0.0;
    let mut averaged_time = 0.0;

    for step in 1..=cfg.total_steps {
        rk4_step_into(field, &mut x, cfg.dt, &mut sx);
        rk4_step_into(field, &mut y, cfg.dt, &mut sy);
        if step % cfg.renorm_interval != 0 && step != cfg.total_steps {
            continue;
        }
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if !dist.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericRange { step, detail: "separation overflowed".into() });
        }
        if dist < f64::MIN_POSITIVE {
            return Err(Error::NumericRange { step, detail: "separation underflowed".into() });
        }
        if step > cfg.transient_steps {
            log_sum += (dist / d0).ln();
            averaged_time += interval_len(step, cfg) as f64 * cfg.dt;
        }
        let scale = d0 / dist;
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi = xi + (*yi - xi) * scale;
        }
    }
    Ok(LyapunovResult {
        lambda1: log_sum / averaged_time,
        transient_steps: cfg.transient_steps,
        renorm_interval: cfg.renorm_interval,
    })
}

// Steps since the previous renormalization.
fn interval_len(step: usize, cfg: &LyapunovConfig) -> usize {
    let rem = step % cfg.renorm_interval;
    if rem == 0 {
        cfg.renorm_interval
    } else {
        rem
    }
}
