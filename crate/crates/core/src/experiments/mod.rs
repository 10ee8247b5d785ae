//! Sweep jobs over reservoir configurations, seed management, aggregation
//! and the quantum/classical operation-count comparison.
//!
//! A sweep expands its grid into (parameters, seed) tasks with seeds
//! `base_seed + i`. Tasks run in parallel; each reservoir trace is computed
//! once and every ridge `gamma` in the grid is fitted from it. Records carry
//! a hash of the result-affecting settings, which is what resuming matches.

mod aggregate;
mod opcount;
mod record;
mod runner;
mod spec;

pub use aggregate::{aggregate, aggregates_to_csv, median, AggregateStats};
pub use opcount::{crossover, opcount_estimate, opcount_scan, OpcountRecord};
pub use record::{cmp_params, records_from_ndjson, records_to_ndjson, Param, Params, Provenance, RunRecord};
pub use runner::{
    benchmark_leakrate, impossible_cells, prepare_data, reduced_noisy_series, run_reduced_noisy, run_sweep, summarize,
    sweep_crcm_regularization, sweep_eps_qubits, sweep_pblocks, Dataset, Env, SweepOutcome,
};
pub use spec::{Grid, Scenario, SweepSpec};
