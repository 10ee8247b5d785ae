use super::{normalize_inputs, Normalization, Reservoir};
use crate::error::{config, contract, Result};
use crate::qsim::{
    self, build_reduced_circuit_scaled, build_reservoir_circuit_scaled, exact_probabilities, BlockPartition,
    NoiseConfig, ProbVector,
};
use crate::rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const BETA_STREAM: u64 = 0x62657461;
const SELECT_STREAM: u64 = 0x73656c65;
const STEP_SALT: u64 = 0x7374_6570_7368_6f74;

/// Number of fed-back probabilities in the reduced circuit.
pub const REDUCED_FEEDBACK: usize = 14;

/// Quantum reservoir configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrcConfig {
    pub n: usize,
    pub eps: f64,
    /// Measurement shots per step; 0 uses exact probabilities.
    pub shots: u64,
    pub beta: Vec<f64>,
    pub seed: u64,
    /// One-block circuit loading only `selected_indices` of `p`.
    pub reduced: bool,
    pub selected_indices: Vec<usize>,
    /// Prefactor of the data-loading angles. The default `2 pi` maps
    /// `[0, 1]` onto one period of the measured probabilities; `4 pi`
    /// folds it twice.
    pub input_scale: f64,
    pub normalization: Option<Normalization>,
    /// Confine entanglement to blocks of this many qubits (reduced mode only).
    #[serde(default)]
    pub block_size: Option<usize>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
}

fn default_trajectories() -> usize {
    qsim::DEFAULT_TRAJECTORIES
}

/// Default shot count `2^(10 + n)`.
pub fn default_shots(n: usize) -> u64 {
    1u64 << (10 + n)
}

impl QrcConfig {
    /// Full three-block reservoir with `beta` drawn uniformly from `[0, 4 pi)`.
    pub fn new(n: usize, eps: f64, seed: u64) -> Self {
        let mut r = rng::stream(seed, BETA_STREAM);
        let beta = (0..n).map(|_| r.random_range(0.0..4.0 * PI)).collect();
        Self {
            n,
            eps,
            shots: 0,
            beta,
            seed,
            reduced: false,
            selected_indices: Vec::new(),
            input_scale: 2.0 * PI,
            normalization: None,
            block_size: None,
            noise: NoiseConfig::default(),
            trajectories: qsim::DEFAULT_TRAJECTORIES,
        }
    }

    /// Reduced one-block reservoir feeding back `min(14, 2^n)` randomly
    /// chosen probabilities.
    pub fn reduced(n: usize, eps: f64, seed: u64) -> Self {
        let mut cfg = Self::new(n, eps, seed);
        cfg.reduced = true;
        let dim = 1usize.checked_shl(n as u32).unwrap_or(0);
        let k = REDUCED_FEEDBACK.min(dim);
        let mut r = rng::stream(seed, SELECT_STREAM);
        cfg.selected_indices = rand::seq::index::sample(&mut r, dim, k).into_vec();
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > qsim::MAX_QUBITS {
            return Err(config(format!("qubit count {} out of range", self.n)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(config(format!("leaking rate {} must lie in (0, 1]", self.eps)));
        }
        if self.beta.len() != self.n {
            return Err(config(format!("beta has {} angles, expected {}", self.beta.len(), self.n)));
        }
        let dim = 1usize << self.n;
        let mut seen = vec![false; dim];
        for &i in &self.selected_indices {
            if i >= dim || std::mem::replace(&mut seen[i], true) {
                return Err(config(format!("selected index {i} is out of range or repeated")));
            }
        }
        if let Some(p) = self.block_size {
            if !self.reduced {
                return Err(config("block decomposition needs the reduced circuit"));
            }
            BlockPartition::new(self.n, p)?;
            if !self.noise.is_noiseless() {
                return Err(config("gate noise is not supported with a block decomposition"));
            }
        }
        self.noise.validate()?;
        if self.trajectories == 0 {
            return Err(config("trajectories must be at least 1"));
        }
        Ok(())
    }
}

/// Reservoir memory: the probability vector and a step counter that keys
/// the per-step shot streams.
#[derive(Debug, Clone, PartialEq)]
pub struct QrcState {
    pub p: ProbVector,
    pub step: u64,
}

impl QrcState {
    /// Uniform distribution.
    pub fn initial(n: usize) -> Result<Self> {
        Ok(Self { p: ProbVector::uniform(n)?, step: 0 })
    }
}

/// One reservoir update `p <- (1 - eps) p + eps p~` for raw input `x_in`.
pub fn qrcm_step(state: &QrcState, x_in: &[f64], cfg: &QrcConfig) -> Result<QrcState> {
    if state.p.len() != 1 << cfg.n {
        return Err(contract(format!("state has {} probabilities, expected {}", state.p.len(), 1usize << cfg.n)));
    }
    let x = match &cfg.normalization {
        Some(norm) => normalize_inputs(x_in, norm)?,
        None => x_in.to_vec(),
    };
    let p = state.p.as_slice();
    let step_seed = rng::mix(cfg.seed ^ STEP_SALT, state.step);
    let fresh = if cfg.reduced {
        let sel: Vec<f64> = cfg.selected_indices.iter().map(|&i| p[i]).collect();
        if let Some(bs) = cfg.block_size {
            let angles = qsim::reduced_angles(&sel, &x, cfg.input_scale);
            let exact = qsim::run_blocked_circuit(&BlockPartition::new(cfg.n, bs)?, &angles)?;
            if cfg.shots == 0 {
                exact
            } else {
                qsim::sample_distribution(&exact, cfg.shots, step_seed)?
            }
        } else {
            measure(&build_reduced_circuit_scaled(cfg.n, &sel, &x, cfg.input_scale)?, cfg, step_seed)?
        }
    } else {
        measure(&build_reservoir_circuit_scaled(cfg.n, p, &x, &cfg.beta, cfg.input_scale)?, cfg, step_seed)?
    };
    Ok(QrcState { p: state.p.blend(&fresh, cfg.eps)?, step: state.step + 1 })
}

fn measure(circuit: &qsim::Circuit, cfg: &QrcConfig, seed: u64) -> Result<ProbVector> {
    if cfg.shots == 0 {
        if !cfg.noise.is_noiseless() {
            return Err(config("noise simulation needs a positive shot count"));
        }
        return Ok(exact_probabilities(&qsim::run_circuit(circuit)?));
    }
    qsim::noisy_run_with(circuit, &cfg.noise, cfg.shots, seed, cfg.trajectories)
}

impl Reservoir for QrcConfig {
    type State = QrcState;

    fn initial_state(&self) -> Result<QrcState> {
        QrcState::initial(self.n)
    }

    fn step(&self, state: &QrcState, x: &[f64]) -> Result<QrcState> {
        qrcm_step(state, x, self)
    }

    fn features<'a>(&self, state: &'a QrcState) -> &'a [f64] {
        state.p.as_slice()
    }

    fn feature_dim(&self) -> usize {
        1 << self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize) -> QrcState {
        QrcState::initial(n).unwrap()
    }

    #[test]
    fn eps_extremes() {
        let mut cfg = QrcConfig::new(3, 1.0, 4);
        cfg.input_scale = 4.0 * PI;
        cfg.normalization = Some(Normalization::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
        let s0 = state(3);
        let s1 = qrcm_step(&s0, &[0.3, -0.2], &cfg).unwrap();
        let circuit = qsim::build_reservoir_circuit(
            3,
            &s0.p,
            &normalize_inputs(&[0.3, -0.2], cfg.normalization.as_ref().unwrap()).unwrap(),
            &cfg.beta,
        )
        .unwrap();
        let fresh = exact_probabilities(&qsim::run_circuit(&circuit).unwrap());
        for (a, b) in s1.p.as_slice().iter().zip(fresh.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
        // eps = 0 is outside the validated range but the update itself keeps p
        cfg.eps = 0.0;
        assert_eq!(qrcm_step(&s0, &[0.9, 0.1], &cfg).unwrap().p, s0.p);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn state_stays_a_distribution() {
        use rand::Rng;
        let cfg = QrcConfig::new(4, 0.3, 11);
        let mut r = rng::stream(5, 0);
        let mut s = state(4);
        for _ in 0..1000 {
            let x = [r.random::<f64>(), r.random::<f64>()];
            s = qrcm_step(&s, &x, &cfg).unwrap();
            let p = s.p.as_slice();
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        assert_eq!(s.step, 1000);
    }

    #[test]
    fn reduced_selection_and_blocks() {
        let cfg = QrcConfig::reduced(7, 0.2, 3);
        assert_eq!(cfg.selected_indices.len(), 14);
        cfg.validate().unwrap();
        assert_eq!(QrcConfig::reduced(3, 0.2, 3).selected_indices.len(), 8);
        assert_eq!(QrcConfig::reduced(7, 0.2, 3), cfg);

        // p = n block decomposition agrees with the unblocked reduced circuit
        let mut blocked = cfg.clone();
        blocked.block_size = Some(7);
        let s = state(7);
        let a = qrcm_step(&s, &[0.4, 0.6], &cfg).unwrap();
        let b = qrcm_step(&s, &[0.4, 0.6], &blocked).unwrap();
        for (x, y) in a.p.as_slice().iter().zip(b.p.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut bad = QrcConfig::new(4, 0.2, 1);
        bad.block_size = Some(2);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn shots_are_seeded_per_step() {
        let mut cfg = QrcConfig::new(3, 0.5, 8);
        cfg.shots = 4096;
        let s = state(3);
        let a = qrcm_step(&s, &[0.1], &cfg).unwrap();
        assert_eq!(a, qrcm_step(&s, &[0.1], &cfg).unwrap());
        let b = qrcm_step(&a, &[0.1], &cfg).unwrap();
        let c = qrcm_step(&QrcState { step: 7, ..a.clone() }, &[0.1], &cfg).unwrap();
        assert_ne!(b.p, c.p);
    }
}
