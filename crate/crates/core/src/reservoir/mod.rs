//! Quantum and classical reservoir computers with a ridge-regression
//! readout.
//!
//! Both reservoirs implement [`Reservoir`], so training
//! ([`collect_trace`] + [`ridge_fit`]), autonomous prediction
//! ([`closed_loop_predict`]) and one-step reconstruction
//! ([`open_loop_reconstruct`]) are shared.
//!
//! Alignment convention: the state reached after feeding row `t` is read out
//! as an estimate of row `t + 1`.

mod crcm;
mod drive;
mod model;
mod normalize;
mod qrcm;
mod ridge;

pub use crcm::{crcm_step, spectral_radius, CrcConfig, Crcm, SparseMatrix};
pub use drive::{
    closed_loop_predict, collect_trace, horizon_lyapunov, horizon_steps, mse, open_loop_reconstruct, Reservoir,
    TraceRun,
};
pub use model::{train, Built, ModelSpec, SavedState, TrainedModel, MODEL_FORMAT_VERSION};
pub use normalize::{normalize_inputs, Normalization};
pub use qrcm::{default_shots, qrcm_step, QrcConfig, QrcState, REDUCED_FEEDBACK};
pub use ridge::{readout, ridge_cost, ridge_fit, OutputWeights, ReservoirTrace};
