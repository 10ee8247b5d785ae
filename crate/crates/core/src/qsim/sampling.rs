use super::{exact_probabilities, Circuit, Pauli, ProbVector, PureState};
use crate::error::{config, Result};
use crate::{par, rng};
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Trajectories used by [`noisy_run`] when the caller does not choose.
pub const DEFAULT_TRAJECTORIES: usize = 256;

const SHOT_STREAM: u64 = 0x73686f74;

/// Multinomial counts for `shots` draws from `p`, by sequential conditional
/// binomials.
pub fn sample_counts(p: &[f64], shots: u64, rng: &mut rng::Rng) -> Vec<u64> {
    let mut counts = vec![0u64; p.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (k, &pk) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == p.len() {
            counts[k] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (pk / mass_left).clamp(0.0, 1.0) } else { 1.0 };
        let c = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("q checked to lie in (0, 1)").sample(rng)
        };
        counts[k] = c;
        remaining -= c;
        mass_left -= pk;
    }
    counts
}

fn frequencies(counts: &[u64], shots: u64) -> ProbVector {
    let inv = 1.0 / shots as f64;
    ProbVector::from_vec_unchecked(counts.iter().map(|&c| c as f64 * inv).collect())
}

/// Empirical frequencies of `shots` projective measurements of `state`.
pub fn sample_shots(state: &PureState, shots: u64, seed: u64) -> Result<ProbVector> {
    sample_distribution(&exact_probabilities(state), shots, seed)
}

/// As [`sample_shots`], starting from an exact distribution.
pub fn sample_distribution(p: &ProbVector, shots: u64, seed: u64) -> Result<ProbVector> {
    if shots == 0 {
        return Err(config("shot count must be at least 1"));
    }
    let mut r = rng::stream(seed, SHOT_STREAM);
    Ok(frequencies(&sample_counts(p.as_slice(), shots, &mut r), shots))
}

/// Error probabilities of the simulated device.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Random Pauli on the written qubit after each gate.
    pub p_gate: f64,
    /// Classical bit flip of each measured bit.
    pub p_meas: f64,
    /// Reset of each qubit to `|0>` before measurement.
    pub p_reset: f64,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_gate", self.p_gate), ("p_meas", self.p_meas), ("p_reset", self.p_reset)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(config(format!("{name} = {v} is not a probability")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_gate == 0.0 && self.p_meas == 0.0 && self.p_reset == 0.0
    }
}

/// Noisy execution with [`DEFAULT_TRAJECTORIES`] gate-noise trajectories.
pub fn noisy_run(circuit: &Circuit, noise: &NoiseConfig, shots: u64, seed: u64) -> Result<ProbVector> {
    noisy_run_with(circuit, noise, shots, seed, DEFAULT_TRAJECTORIES)
}

/// Monte-Carlo noisy execution.
///
/// The `shots` are split as evenly as possible over
/// `min(trajectories, shots)` statevector trajectories. Each trajectory draws
/// its own gate errors (after every gate, with probability `p_gate`, a
/// uniformly random X, Y or Z on the gate's target). Reset and readout
/// errors act independently per shot and per qubit; since they follow the
/// last gate they are applied exactly, as a classical channel on the
/// trajectory's outcome distribution, before the shots are drawn. With
/// `trajectories >= shots` every shot has its own gate-error history.
///
/// With all probabilities zero the result equals
/// `sample_shots(run_circuit(circuit), shots, seed)` bit for bit.
pub fn noisy_run_with(
    circuit: &Circuit,
    noise: &NoiseConfig,
    shots: u64,
    seed: u64,
    trajectories: usize,
) -> Result<ProbVector> {
    noise.validate()?;
    if shots == 0 {
        return Err(config("shot count must be at least 1"));
    }
    if trajectories == 0 {
        return Err(config("at least one trajectory is required"));
    }
    if noise.is_noiseless() {
        return sample_shots(&super::run_circuit(circuit)?, shots, seed);
    }
    let m = (trajectories as u64).min(shots);
    let base = shots / m;
    let extra = shots % m;
    let per_traj = par::map_range(m as usize, |j| -> Result<Vec<u64>> {
        let j = j as u64;
        let mut r = rng::stream(rng::mix(seed, j), SHOT_STREAM);
        let state = trajectory_state(circuit, noise.p_gate, &mut r)?;
        let mut p = exact_probabilities(&state).into_vec();
        readout_channel(&mut p, circuit.n(), noise.p_reset, noise.p_meas);
        let k = base + u64::from(j < extra);
        Ok(sample_counts(&p, k, &mut r))
    });
    let mut counts = vec![0u64; 1 << circuit.n()];
    for c in per_traj {
        for (acc, v) in counts.iter_mut().zip(c?) {
            *acc += v;
        }
    }
    Ok(frequencies(&counts, shots))
}

fn trajectory_state(circuit: &Circuit, p_gate: f64, r: &mut rng::Rng) -> Result<PureState> {
    let mut state = PureState::zero(circuit.n())?;
    for g in circuit.gates() {
        g.apply(&mut state)?;
        if p_gate > 0.0 && r.random::<f64>() < p_gate {
            let pauli = [Pauli::X, Pauli::Y, Pauli::Z][r.random_range(0..3)];
            state.apply_pauli(g.target(), pauli)?;
        }
    }
    Ok(state)
}

/// Per-qubit reset (bit forced to 0 with probability `p_reset`) followed by
/// a symmetric bit flip, applied to a big-endian outcome distribution.
pub(crate) fn readout_channel(p: &mut [f64], n: usize, p_reset: f64, p_meas: f64) {
    if p_reset == 0.0 && p_meas == 0.0 {
        return;
    }
    for q in 0..n {
        let stride = 1 << (n - 1 - q);
        for chunk in p.chunks_exact_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let r0 = *a0 + p_reset * *a1;
                let r1 = (1.0 - p_reset) * *a1;
                *a0 = (1.0 - p_meas) * r0 + p_meas * r1;
                *a1 = p_meas * r0 + (1.0 - p_meas) * r1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{run_circuit, Gate};
    use std::f64::consts::PI;

    fn plus() -> PureState {
        let mut s = PureState::zero(1).unwrap();
        s.apply_ry(0, PI / 2.0).unwrap();
        s
    }

    #[test]
    fn basis_state_is_deterministic() {
        for k in 0..8 {
            let s = PureState::basis(3, k).unwrap();
            for shots in [1, 7, 1000] {
                let f = sample_shots(&s, shots, 5).unwrap();
                assert_eq!(f, ProbVector::basis(3, k).unwrap());
            }
        }
        assert!(sample_shots(&plus(), 0, 1).is_err());
    }

    #[test]
    fn uniform_qubit_within_three_sigma() {
        let s = plus();
        let mut fails = 0;
        for seed in 0..200 {
            let f = sample_shots(&s, 2048, seed).unwrap();
            if (f.as_slice()[0] - 0.5).abs() >= 0.05 {
                fails += 1;
            }
        }
        assert!(fails <= 2, "{fails} of 200 outside 0.05");
    }

    #[test]
    fn counts_sum_and_reproducible() {
        let mut s = PureState::zero(3).unwrap();
        for (q, a) in [(0, 0.3), (1, 1.2), (2, 2.5)] {
            s.apply_ry(q, a).unwrap();
        }
        let a = sample_shots(&s, 12345, 99).unwrap();
        assert_eq!(a, sample_shots(&s, 12345, 99).unwrap());
        assert_ne!(a, sample_shots(&s, 12345, 100).unwrap());
        assert!((a.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_shrinks_like_inverse_sqrt_shots() {
        let mut s = PureState::zero(2).unwrap();
        s.apply_ry(0, 1.0).unwrap();
        s.apply_ry(1, 2.0).unwrap();
        let exact = exact_probabilities(&s);
        let mean_err = |shots: u64| {
            (0..100)
                .map(|seed| {
                    let f = sample_shots(&s, shots, seed).unwrap();
                    f.as_slice().iter().zip(exact.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                })
                .sum::<f64>()
                / 100.0
        };
        let ratio = mean_err(4096) / mean_err(1024);
        assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_noise_matches_sampling() {
        let c = crate::qsim::build_reduced_circuit(3, &[0.1, 0.2], &[0.3]).unwrap();
        let clean = sample_shots(&run_circuit(&c).unwrap(), 5000, 17).unwrap();
        assert_eq!(noisy_run(&c, &NoiseConfig::noiseless(), 5000, 17).unwrap(), clean);
    }

    #[test]
    fn measurement_flip_on_empty_circuit() {
        let c = Circuit::new(1).unwrap();
        let noise = NoiseConfig { p_meas: 0.5, ..Default::default() };
        let k = 100_000u64;
        let f = noisy_run(&c, &noise, k, 3).unwrap();
        let tol = 3.0 / (2.0 * (k as f64).sqrt());
        assert!((f.as_slice()[0] - 0.5).abs() < tol, "{:?}", f);
    }

    #[test]
    fn gate_noise_changes_statistics() {
        let c = Circuit::from_gates(1, vec![Gate::Ry { qubit: 0, angle: 0.0 }]).unwrap();
        let noise = NoiseConfig { p_gate: 1.0, ..Default::default() };
        let noisy = noisy_run_with(&c, &noise, 30_000, 4, 30_000).unwrap();
        // X and Y flip |0>, Z does not: P(1) = 2/3
        assert!((noisy.as_slice()[1] - 2.0 / 3.0).abs() < 0.02, "{noisy:?}");
    }

    #[test]
    fn reset_forces_bits_to_zero() {
        let c =
            Circuit::from_gates(2, vec![Gate::Ry { qubit: 0, angle: PI }, Gate::Ry { qubit: 1, angle: PI }]).unwrap();
        let f = noisy_run(&c, &NoiseConfig { p_reset: 1.0, ..Default::default() }, 100, 1).unwrap();
        assert_eq!(f, ProbVector::basis(2, 0).unwrap());
        let mut p = vec![0.0, 0.0, 0.0, 1.0];
        readout_channel(&mut p, 2, 0.5, 0.0);
        assert_eq!(p, vec![0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn trajectory_count_does_not_change_noiseless_channel_results() {
        let c = crate::qsim::build_reduced_circuit(2, &[0.2], &[0.4]).unwrap();
        let noise = NoiseConfig { p_meas: 0.1, ..Default::default() };
        let exact = {
            let mut p = exact_probabilities(&run_circuit(&c).unwrap()).into_vec();
            readout_channel(&mut p, 2, 0.0, 0.1);
            p
        };
        for m in [1, 16, 4096] {
            let f = noisy_run_with(&c, &noise, 200_000, 8, m).unwrap();
            for (a, b) in f.as_slice().iter().zip(&exact) {
                assert!((a - b).abs() < 0.01, "m = {m}");
            }
        }
        assert!(noisy_run_with(&c, &noise, 10, 8, 0).is_err());
        assert!(noisy_run(&c, &NoiseConfig { p_gate: 1.5, ..Default::default() }, 10, 8).is_err());
    }
}
