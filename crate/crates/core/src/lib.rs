//! Hybrid quantum-classical reservoir computing for low-dimensional
//! thermal convection models.
//!
//! * [`dynamics`]: Lorenz-type Galerkin models, benchmark signals,
//!   Lyapunov exponents and flow-field reconstruction.
//! * [`qsim`]: exact statevector simulation of the reservoir circuits,
//!   shot sampling, noise and entanglement-block decomposition.
//! * [`reservoir`]: the quantum and classical reservoir models, ridge
//!   readout, closed-loop prediction and open-loop reconstruction.
//! * [`experiments`]: seeded parameter sweeps and their aggregation.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod par;
pub mod qsim;
pub mod reservoir;
pub mod rng;

pub use error::{Error, Result};
