use crate::error::{config, Result};
use crate::qsim::NoiseConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ClosedLoopL63,
    OpenLoopL8,
    ReducedNoisyL8,
    PblockL8,
    BenchmarkLeakrate,
    CrcmRegularization,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::ClosedLoopL63,
        Scenario::OpenLoopL8,
        Scenario::ReducedNoisyL8,
        Scenario::PblockL8,
        Scenario::BenchmarkLeakrate,
        Scenario::CrcmRegularization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClosedLoopL63 => "closed_loop_l63",
            Scenario::OpenLoopL8 => "open_loop_l8",
            Scenario::ReducedNoisyL8 => "reduced_noisy_l8",
            Scenario::PblockL8 => "pblock_l8",
            Scenario::BenchmarkLeakrate => "benchmark_leakrate",
            Scenario::CrcmRegularization => "crcm_regularization",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
            config(format!("unknown scenario '{s}'; valid: {}", names.join(", ")))
        })
    }
}

/// Parameter lists swept by a scenario. Lists a scenario does not use are
/// ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub eps: Vec<f64>,
    pub qubits: Vec<usize>,
    pub gamma: Vec<f64>,
    /// Classical reservoir sizes.
    pub n_res: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self { eps: vec![0.05], qubits: vec![7], gamma: vec![1e-8], n_res: Vec::new(), block_sizes: Vec::new() }
    }
}

/// A declarative sweep: scenario, grid, seeds and data settings.
///
/// `train_steps` counts every row fed during training, washout included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: Scenario,
    #[serde(default)]
    pub grid: Grid,
    pub seeds: usize,
    pub base_seed: u64,
    pub train_steps: usize,
    pub washout: usize,
    pub test_steps: usize,
    /// Integration step of the generated data.
    pub dt: f64,
    /// Discarded leading steps of the generated data.
    pub transient: usize,
    /// Seed of the data trajectory, shared by every run.
    pub data_seed: u64,
    /// Min-max scale every column to `[0, 1]` with training-window extremes.
    pub scale_data: bool,
    /// Input columns; empty means every column (closed loop).
    #[serde(default)]
    pub inputs: Vec<String>,
    pub horizon_threshold: f64,
    pub lyapunov: f64,
    /// Shots of the sampled environments; 0 means `2^(10 + n)`.
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub trajectories: usize,
    /// Use the printed 8-mode coefficient set instead of the derived one.
    #[serde(default)]
    pub printed_coefficients: bool,
}

fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| format!("1e{e}").parse().expect("valid literal")).collect()
}

impl SweepSpec {
    /// Full-size defaults for a scenario.
    pub fn defaults(scenario: Scenario) -> Self {
        let mut s = SweepSpec {
            scenario,
            grid: Grid::default(),
            seeds: 10,
            base_seed: 1,
            train_steps: 2000,
            washout: 50,
            test_steps: 2000,
            dt: 0.01,
            transient: 5000,
            data_seed: 7,
            scale_data: true,
            inputs: vec!["A4".into()],
            horizon_threshold: 0.3,
            lyapunov: 0.825,
            shots: 0,
            noise: NoiseConfig::noiseless(),
            trajectories: crate::qsim::DEFAULT_TRAJECTORIES,
            printed_coefficients: false,
        };
        match scenario {
            Scenario::ClosedLoopL63 => {
                s.grid.eps = vec![0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0];
                s.grid.qubits = vec![5, 6, 7];
                s.grid.gamma = vec![0.0];
                s.seeds = 50;
                s.test_steps = 500;
                s.dt = 0.02;
                s.scale_data = false;
                s.inputs = Vec::new();
                s.lyapunov = 0.9056;
            }
            Scenario::OpenLoopL8 => {
                s.grid.gamma = decades(-10, -4);
            }
            Scenario::CrcmRegularization => {
                s.grid.gamma = decades(-10, 1);
                s.grid.n_res = vec![128, 256, 512];
                s.seeds = 30;
            }
            Scenario::PblockL8 => {
                s.grid.qubits = (3..=8).collect();
                s.grid.block_sizes = (2..=8).collect();
                s.grid.eps = vec![0.2];
                s.inputs = vec!["A4".into(), "B3".into()];
                s.seeds = 100;
            }
            Scenario::ReducedNoisyL8 => {
                s.grid.eps = vec![0.2];
                s.inputs = vec!["A4".into(), "B3".into()];
                s.noise = NoiseConfig { p_gate: 0.1, p_meas: 0.05, p_reset: 0.03 };
            }
            Scenario::BenchmarkLeakrate => {
                s.grid.eps = vec![0.2, 1.0];
                s.train_steps = 500;
                s.washout = 100;
                s.test_steps = 500;
                s.transient = 200;
                s.dt = 0.1;
                s.scale_data = false;
                s.inputs = Vec::new();
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(config("seeds must be at least 1"));
        }
        if self.train_steps < self.washout + 2 {
            return Err(config(format!(
                "train_steps = {} leaves nothing to fit after washout {}",
                self.train_steps, self.washout
            )));
        }
        if self.test_steps == 0 {
            return Err(config("test_steps must be positive"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.horizon_threshold > 0.0) || !(self.lyapunov > 0.0) {
            return Err(config("horizon_threshold and lyapunov must be positive"));
        }
        if self.trajectories == 0 {
            return Err(config("trajectories must be at least 1"));
        }
        self.noise.validate()?;
        let g = &self.grid;
        let need =
            |ok: bool, what: &str| if ok { Ok(()) } else { Err(config(format!("grid.{what} must not be empty"))) };
        need(!g.gamma.is_empty(), "gamma")?;
        if let Some(bad) = g.gamma.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(config(format!("gamma = {bad} must be non-negative")));
        }
        if let Some(bad) = g.eps.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(config(format!("eps = {bad} outside (0, 1]")));
        }
        if let Some(bad) = g.qubits.iter().find(|&&n| n == 0 || n > 16) {
            return Err(config(format!("qubit count {bad} outside 1..=16")));
        }
        match self.scenario {
            Scenario::ClosedLoopL63 | Scenario::OpenLoopL8 | Scenario::ReducedNoisyL8 => {
                need(!g.eps.is_empty(), "eps")?;
                need(!g.qubits.is_empty(), "qubits")?;
            }
            Scenario::PblockL8 => {
                need(!g.eps.is_empty(), "eps")?;
                need(!g.qubits.is_empty(), "qubits")?;
                need(!g.block_sizes.is_empty(), "block_sizes")?;
                if g.block_sizes.contains(&0) {
                    return Err(config("block sizes must be at least 1"));
                }
            }
            Scenario::BenchmarkLeakrate => need(!g.eps.is_empty(), "eps")?,
            Scenario::CrcmRegularization => {
                need(!g.n_res.is_empty(), "n_res")?;
                if !g.qubits.is_empty() {
                    need(!g.eps.is_empty(), "eps")?;
                }
            }
        }
        if matches!(
            self.scenario,
            Scenario::OpenLoopL8 | Scenario::ReducedNoisyL8 | Scenario::PblockL8 | Scenario::CrcmRegularization
        ) && self.inputs.is_empty()
        {
            return Err(config("open-loop scenarios need at least one input column"));
        }
        Ok(())
    }

    /// Hex SHA-256 over every setting that changes a run's result. Grid
    /// lists and the seed count are excluded, so growing a sweep keeps the
    /// records already computed.
    pub fn config_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("spec serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("grid");
            obj.remove("seeds");
            obj.remove("base_seed");
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Seed of run `index`.
    pub fn seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }
}
