use super::PureState;
use crate::error::{contract, Error, Result};
use std::fmt::Write as _;

const SUM_TOL: f64 = 1e-10;

/// Probability distribution over the `2^n` basis outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    p: Vec<f64>,
}

impl ProbVector {
    /// Checks that entries lie in `[0, 1]` and sum to one.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || !p.len().is_power_of_two() {
            return Err(contract(format!("probability vector length {} is not a power of two", p.len())));
        }
        if let Some((k, v)) = p.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(contract(format!("probability p[{k}] = {v} outside [0, 1]")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(contract(format!("probabilities sum to {sum}")));
        }
        Ok(Self { p })
    }

    /// Internal constructor for vectors that are distributions by construction.
    pub(crate) fn from_vec_unchecked(p: Vec<f64>) -> Self {
        debug_assert!(p.len().is_power_of_two());
        Self { p }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_n(n)?;
        let len = 1usize << n;
        Ok(Self { p: vec![1.0 / len as f64; len] })
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        let mut p = vec![0.0; 1 << n];
        *p.get_mut(k).ok_or_else(|| contract(format!("basis index {k} out of range")))? = 1.0;
        Ok(Self { p })
    }

    pub fn n_qubits(&self) -> usize {
        self.p.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    /// `(1 - eps) self + eps other`.
    pub fn blend(&self, other: &ProbVector, eps: f64) -> Result<ProbVector> {
        if self.len() != other.len() {
            return Err(contract("blending distributions of different sizes"));
        }
        let p = self.p.iter().zip(&other.p).map(|(a, b)| (1.0 - eps) * a + eps * b).collect();
        Ok(Self { p })
    }

    /// Outer product, `self` on the most significant qubits.
    pub fn tensor(&self, other: &ProbVector) -> ProbVector {
        let mut p = Vec::with_capacity(self.len() * other.len());
        for a in &self.p {
            p.extend(other.p.iter().map(|b| a * b));
        }
        Self { p }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,probability\n");
        for (k, v) in self.p.iter().enumerate() {
            writeln!(out, "{k},{v:?}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut p = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("index")) {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let (k, v) = line.split_once(',').ok_or_else(|| perr("expected 'index,probability'".into()))?;
            let k: usize = k.trim().parse().map_err(|e| perr(format!("bad index: {e}")))?;
            if k != p.len() {
                return Err(perr(format!("expected index {}, found {k}", p.len())));
            }
            p.push(v.trim().parse::<f64>().map_err(|e| perr(format!("bad probability: {e}")))?);
        }
        Self::new(p)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > super::MAX_QUBITS {
        return Err(contract(format!("qubit count must be in 1..={}, got {n}", super::MAX_QUBITS)));
    }
    Ok(())
}

/// `p_k = |a_k|^2`.
pub fn exact_probabilities(state: &PureState) -> ProbVector {
    ProbVector { p: state.amps().iter().map(|a| a.norm_sqr()).collect() }
}
