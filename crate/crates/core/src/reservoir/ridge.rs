use crate::error::{config, contract, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Reservoir states (one column per retained step) and aligned targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirTrace {
    pub states: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

impl ReservoirTrace {
    pub fn new(states: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        if states.ncols() != targets.ncols() {
            return Err(contract(format!(
                "trace has {} state columns but {} target columns",
                states.ncols(),
                targets.ncols()
            )));
        }
        Ok(Self { states, targets })
    }

    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }
}

/// Linear readout `x = W p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputWeights {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub w_out: Vec<f64>,
    pub ridge_gamma: f64,
}

impl OutputWeights {
    pub fn from_matrix(w: &DMatrix<f64>, ridge_gamma: f64) -> Self {
        let mut w_out = Vec::with_capacity(w.len());
        for i in 0..w.nrows() {
            w_out.extend(w.row(i).iter());
        }
        Self { rows: w.nrows(), cols: w.ncols(), w_out, ridge_gamma }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.w_out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_out.len() != self.rows * self.cols {
            return Err(config("readout matrix has the wrong number of entries"));
        }
        if self.w_out.iter().any(|v| !v.is_finite()) {
            return Err(config("readout matrix has non-finite entries"));
        }
        Ok(())
    }
}

/// Sum over columns of `|W r - u|^2`, plus `gamma tr(W W^T)`; the quantity
/// [`ridge_fit`] minimizes.
pub fn ridge_cost(w: &DMatrix<f64>, trace: &ReservoirTrace, gamma: f64) -> f64 {
    let resid = w * &trace.states - &trace.targets;
    resid.norm_squared() + gamma * w.norm_squared()
}

/// Closed-form ridge solution `W = U R^T (R R^T + gamma I)^-1`.
///
/// The solve uses a Cholesky factorization. A failed factorization, or a
/// factor whose diagonal spans more than `1e8` (condition number above
/// `1e16`), is reported as [`Error::Singular`].
pub fn ridge_fit(trace: &ReservoirTrace, gamma: f64) -> Result<OutputWeights> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(config(format!("regularization gamma = {gamma} must be non-negative")));
    }
    if trace.is_empty() {
        return Err(config("cannot fit a readout to an empty trace"));
    }
    let r = &trace.states;
    let mut gram = r * r.transpose();
    for i in 0..gram.nrows() {
        gram[(i, i)] += gamma;
    }
    let rhs = r * trace.targets.transpose();
    let chol = gram.cholesky().ok_or(Error::Singular { gamma })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if !(lo > 0.0) || hi / lo > 1e8 {
        return Err(Error::Singular { gamma });
    }
    let wt = chol.solve(&rhs);
    let w = wt.transpose();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { gamma });
    }
    Ok(OutputWeights::from_matrix(&w, gamma))
}

/// `W state`.
pub fn readout(w: &OutputWeights, state: &[f64]) -> Result<Vec<f64>> {
    if state.len() != w.cols {
        return Err(contract(format!("readout expects {} features, got {}", w.cols, state.len())));
    }
    Ok(w.w_out.chunks_exact(w.cols).map(|row| row.iter().zip(state).map(|(a, b)| a * b).sum()).collect())
}
