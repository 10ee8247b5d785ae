//! Statevector simulation of the reservoir circuits.
//!
//! Registers hold at most [`MAX_QUBITS`] qubits and always start in
//! `|0...0>`. Basis indices are big-endian (qubit 0 is the most significant
//! bit).

mod blocks;
mod circuit;
mod probs;
mod sampling;
mod state;

pub use blocks::{build_blocked_gates, run_blocked_circuit, BlockPartition};
pub use circuit::{build_block, build_reduced_circuit, build_reservoir_circuit, run_circuit, Circuit, Gate};
pub(crate) use circuit::{build_reduced_circuit_scaled, build_reservoir_circuit_scaled, reduced_angles};
pub use probs::{exact_probabilities, ProbVector};
pub use sampling::{
    noisy_run, noisy_run_with, sample_counts, sample_distribution, sample_shots, NoiseConfig, DEFAULT_TRAJECTORIES,
};
pub use state::{apply_cnot, apply_ry, Pauli, PureState, MAX_QUBITS};
