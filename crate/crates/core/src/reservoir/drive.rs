use super::{readout, OutputWeights, ReservoirTrace};
use crate::dynamics::TimeSeries;
use crate::error::{config, contract, Error, Result};
use nalgebra::DMatrix;

/// A driven reservoir: a state, an update rule and a feature vector read by
/// the linear output layer.
pub trait Reservoir: Sync {
    type State: Clone + Send;

    fn initial_state(&self) -> Result<Self::State>;
    fn step(&self, state: &Self::State, x: &[f64]) -> Result<Self::State>;
    fn features<'a>(&self, state: &'a Self::State) -> &'a [f64];
    fn feature_dim(&self) -> usize;
}

/// Teacher-forced training trace plus the state after the final row.
#[derive(Debug, Clone)]
pub struct TraceRun<S> {
    pub trace: ReservoirTrace,
    /// State after feeding every row of the series; its readout estimates the
    /// row that follows the series.
    pub last_state: S,
}

/// Feed rows `0..L` of `series` (restricted to `input_cols`) into the
/// reservoir from its initial state. The state after row `t` is paired with
/// target row `t + 1` over `target_cols`; the first `washout` pairs are
/// dropped, leaving `L - 1 - washout` columns.
pub fn collect_trace<M: Reservoir>(
    model: &M,
    series: &TimeSeries,
    washout: usize,
    input_cols: &[usize],
    target_cols: &[usize],
) -> Result<TraceRun<M::State>> {
    let rows = series.rows();
    if rows < washout + 2 {
        return Err(config(format!("series has {rows} rows; washout {washout} needs at least {}", washout + 2)));
    }
    check_cols(series, input_cols)?;
    check_cols(series, target_cols)?;
    let n_cols = rows - 1 - washout;
    let mut states = DMatrix::zeros(model.feature_dim(), n_cols);
    let mut targets = DMatrix::zeros(target_cols.len(), n_cols);
    let mut state = model.initial_state()?;
    let mut x = vec![0.0; input_cols.len()];
    for t in 0..rows {
        let row = series.row(t);
        for (xi, &c) in x.iter_mut().zip(input_cols) {
            *xi = row[c];
        }
        state = model.step(&state, &x)?;
        if t >= washout && t + 1 < rows {
            let j = t - washout;
            states.column_mut(j).copy_from_slice(model.features(&state));
            let next = series.row(t + 1);
            for (i, &c) in target_cols.iter().enumerate() {
                targets[(i, j)] = next[c];
            }
        }
    }
    Ok(TraceRun { trace: ReservoirTrace::new(states, targets)?, last_state: state })
}

fn check_cols(series: &TimeSeries, cols: &[usize]) -> Result<()> {
    match cols.iter().find(|&&c| c >= series.cols()) {
        Some(c) => Err(config(format!("column {c} is not present (series has {})", series.cols()))),
        None if cols.is_empty() => Err(config("no columns selected")),
        None => Ok(()),
    }
}

/// Autonomous prediction: emit the readout of the current state, then feed
/// it back as the next input.
pub fn closed_loop_predict<M: Reservoir>(
    model: &M,
    w: &OutputWeights,
    init_state: &M::State,
    steps: usize,
    dt: f64,
    labels: Vec<String>,
) -> Result<TimeSeries> {
    let mut out = TimeSeries::new(dt, labels)?;
    if out.cols() != w.rows {
        return Err(contract(format!("{} labels for a {}-output readout", out.cols(), w.rows)));
    }
    let mut state = init_state.clone();
    for step in 0..steps {
        let y = readout(w, model.features(&state))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::PredictionDiverged { step });
        }
        out.push(&y)?;
        if step + 1 < steps {
            state = model.step(&state, &y)?;
        }
    }
    Ok(out)
}

/// One-step reconstruction: emit the readout of the current state, then
/// feed the true input row. Estimates are never fed back.
pub fn open_loop_reconstruct<M: Reservoir>(
    model: &M,
    w: &OutputWeights,
    init_state: &M::State,
    inputs: &TimeSeries,
    steps: usize,
    labels: Vec<String>,
) -> Result<TimeSeries> {
    if inputs.rows() + 1 < steps {
        return Err(config(format!("{} input rows cannot drive {steps} steps", inputs.rows())));
    }
    let mut out = TimeSeries::new(inputs.dt(), labels)?;
    if out.cols() != w.rows {
        return Err(contract(format!("{} labels for a {}-output readout", out.cols(), w.rows)));
    }
    let mut state = init_state.clone();
    for step in 0..steps {
        let y = readout(w, model.features(&state))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::PredictionDiverged { step });
        }
        out.push(&y)?;
        if step + 1 < steps {
            state = model.step(&state, inputs.row(step))?;
        }
    }
    Ok(out)
}

/// `(1/T) sum_t |pred_t - target_t|^2`.
pub fn mse(pred: &TimeSeries, target: &TimeSeries) -> Result<f64> {
    if pred.rows() != target.rows() || pred.cols() != target.cols() {
        return Err(contract(format!(
            "shape mismatch: {}x{} vs {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    if pred.is_empty() {
        return Err(contract("mse of empty series"));
    }
    let total: f64 = pred
        .iter_rows()
        .zip(target.iter_rows())
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
        .sum();
    Ok(total / pred.rows() as f64)
}

/// Steps until the error `|pred - target| / mean_t |target|` first exceeds
/// `threshold`; the full length if it never does.
pub fn horizon_steps(pred: &TimeSeries, target: &TimeSeries, threshold: f64) -> Result<usize> {
    mse(pred, target)?;
    let norms: Vec<f64> = target.iter_rows().map(norm).collect();
    let scale = norms.iter().sum::<f64>() / norms.len() as f64;
    Ok(pred
        .iter_rows()
        .zip(target.iter_rows())
        .position(|(a, b)| {
            let e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            !(norm(&e) / scale <= threshold)
        })
        .unwrap_or(pred.rows()))
}

/// Prediction horizon in Lyapunov times `lambda_1 t`.
pub fn horizon_lyapunov(pred: &TimeSeries, target: &TimeSeries, threshold: f64, lambda1: f64) -> Result<f64> {
    Ok(horizon_steps(pred, target, threshold)? as f64 * pred.dt() * lambda1)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
