//! Ground-truth dynamics: Lorenz-type Galerkin convection models, the
//! NARMA-2 and Mackey-Glass benchmark signals, Lyapunov exponent estimation
//! and reconstruction of the physical flow fields from mode amplitudes.

mod benchmarks;
mod fields;
mod integrate;
mod lorenz;
mod series;

pub use benchmarks::{mackey_glass_series, narma2_series, MackeyGlassConfig, NarmaConfig};
pub use fields::{energy_vorticity, reconstruct_fields, FieldDiagnostics, FieldSnapshot};
pub use integrate::{largest_lyapunov, rk4_integrate, rk4_step, LyapunovConfig, LyapunovResult};
pub use lorenz::{lorenz63_rhs, lorenz8_rhs, FnField, Lorenz63, Lorenz8, VectorField};
pub use series::TimeSeries;

use crate::error::{config, contract, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of the Lorenz-type convection models.
///
/// Only `sigma`, `r` and the aspect ratio `gamma_aspect` are independent;
/// everything else is derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvectionParams {
    /// Prandtl number.
    pub sigma: f64,
    /// Relative Rayleigh number `Ra / Ra_c`.
    pub r: f64,
    /// Aspect-ratio parameter `4 beta^2 / (alpha^2 + beta^2)`.
    pub b: f64,
    /// Aspect ratio of the cell, length over height.
    pub gamma_aspect: f64,
    /// Horizontal wavenumber `2 pi / gamma_aspect`.
    pub alpha: f64,
    /// Vertical wavenumber, always `pi`.
    pub beta: f64,
    pub rayleigh: f64,
    pub rayleigh_crit: f64,
}

impl ConvectionParams {
    pub fn new(sigma: f64, r: f64, gamma_aspect: f64) -> Result<Self> {
        if !(gamma_aspect > 0.0 && gamma_aspect.is_finite()) {
            return Err(config(format!("aspect ratio must be positive, got {gamma_aspect}")));
        }
        if !(sigma.is_finite() && r.is_finite()) {
            return Err(config("sigma and r must be finite"));
        }
        let alpha = 2.0 * PI / gamma_aspect;
        let beta = PI;
        let k2 = alpha * alpha + beta * beta;
        let b = 4.0 * beta * beta / k2;
        let rayleigh_crit = k2.powi(3) / (alpha * alpha);
        Ok(Self { sigma, r, b, gamma_aspect, alpha, beta, rayleigh: r * rayleigh_crit, rayleigh_crit })
    }

    /// Build from `b` instead of the aspect ratio; requires `0 < b < 4`.
    pub fn from_b(sigma: f64, r: f64, b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 4.0) {
            return Err(config(format!("b must lie in (0, 4), got {b}")));
        }
        let gamma_aspect = (4.0 * b / (4.0 - b)).sqrt();
        let mut p = Self::new(sigma, r, gamma_aspect)?;
        // keep the caller's exact b rather than the round-tripped one
        p.b = b;
        Ok(p)
    }

    /// sigma = 10, r = 28, b = 8/3 (aspect ratio 2 sqrt 2).
    pub fn classic() -> Self {
        Self::from_b(10.0, 28.0, 8.0 / 3.0).expect("classic parameters are valid")
    }

    /// `alpha^2 + beta^2`.
    pub fn k2(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta
    }

    /// `b` from the aspect ratio, `4 Gamma^2 / (4 + Gamma^2)`.
    pub fn b_from_aspect(&self) -> f64 {
        let g2 = self.gamma_aspect * self.gamma_aspect;
        4.0 * g2 / (4.0 + g2)
    }
}

impl Default for ConvectionParams {
    fn default() -> Self {
        Self::classic()
    }
}

/// Mode amplitudes of a Lorenz-type model at rescaled time `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    /// Stream-function amplitudes `A_1..A_N`.
    pub a: Vec<f64>,
    /// Temperature amplitudes `B_1..B_M`.
    pub bm: Vec<f64>,
    pub tau: f64,
}

impl ModeState {
    pub fn new(a: Vec<f64>, bm: Vec<f64>) -> Self {
        Self { a, bm, tau: 0.0 }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; m])
    }

    /// Split a flat `(A.., B..)` vector with `n` stream-function modes.
    pub fn from_flat(n: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() < n {
            return Err(contract(format!("flat state of length {} shorter than N = {n}", flat.len())));
        }
        Ok(Self::new(flat[..n].to_vec(), flat[n..].to_vec()))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.a.iter().chain(self.bm.iter()).copied().collect()
    }

    pub fn dof(&self) -> usize {
        self.a.len() + self.bm.len()
    }

    /// Embed an L63 state `(A_1, B_1, B_2)` in the 8-mode layout.
    pub fn embed_l63(&self) -> Result<Self> {
        if self.a.len() != 1 || self.bm.len() != 2 {
            return Err(contract("embed_l63 expects N = 1, M = 2"));
        }
        Ok(Self { a: vec![self.a[0], 0.0, 0.0, 0.0], bm: vec![self.bm[0], self.bm[1], 0.0, 0.0], tau: self.tau })
    }
}

/// Column labels `A1..AN, B1..BM`.
pub fn mode_labels(n: usize, m: usize) -> Vec<String> {
    (1..=n).map(|i| format!("A{i}")).chain((1..=m).map(|k| format!("B{k}"))).collect()
}

/// Which convection model to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    L63,
    L8,
}

impl ModelKind {
    pub fn dof(self) -> usize {
        match self {
            ModelKind::L63 => 3,
            ModelKind::L8 => 8,
        }
    }

    pub fn field(self, params: ConvectionParams) -> Box<dyn VectorField> {
        match self {
            ModelKind::L63 => Box::new(Lorenz63::new(params)),
            ModelKind::L8 => Box::new(Lorenz8::new(params)),
        }
    }
}

/// Generate a training trajectory the standard way: random initial
/// condition uniform in `[-1, 1]^dof`, `transient` discarded steps, then
/// `steps` recorded steps (`steps + 1` rows).
pub fn generate_trajectory(
    model: ModelKind,
    params: ConvectionParams,
    dt: f64,
    steps: usize,
    transient: usize,
    seed: u64,
) -> Result<TimeSeries> {
    trajectory_from(model.field(params).as_ref(), dt, steps, transient, seed)
}

/// [`generate_trajectory`] for an arbitrary field.
pub fn trajectory_from(
    field: &dyn VectorField,
    dt: f64,
    steps: usize,
    transient: usize,
    seed: u64,
) -> Result<TimeSeries> {
    use rand::Rng;
    let mut rng = crate::rng::stream(seed, 0x7261_6a65);
    let mut x: Vec<f64> = (0..field.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut scratch = integrate::Rk4Scratch::new(field.dim());
    for step in 0..transient {
        integrate::rk4_step_into(field, &mut x, dt, &mut scratch);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::Diverged { step });
        }
    }
    rk4_integrate(field, &x, dt, steps)
}
