use crate::error::{contract, Result};
use num_complex::Complex64;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 30;

/// Pure state of an `n`-qubit register.
///
/// Basis index `k` is big-endian: qubit 0 is the most significant bit, so
/// qubit `q` corresponds to bit `n - 1 - q` of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl PureState {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if k >= s.amps.len() {
            return Err(contract(format!("basis index {k} out of range for {n} qubits")));
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps raw amplitudes; the length must be a power of two. The vector is
    /// taken as is, without normalization.
    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(contract(format!("amplitude vector length {len} is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        check_size(n)?;
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(contract(format!("qubit {q} out of range for {} qubits", self.n)));
        }
        Ok(())
    }

    fn stride(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    pub fn apply_ry(&mut self, q: usize, angle: f64) -> Result<()> {
        self.check_qubit(q)?;
        let (s, c) = (0.5 * angle).sin_cos();
        let stride = self.stride(q);
        for chunk in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = x0 * c - x1 * s;
                *a1 = x0 * s + x1 * c;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(contract(format!("CNOT control and target are both {control}")));
        }
        let cbit = self.stride(control);
        let tbit = self.stride(target);
        for k in 0..self.amps.len() {
            // visit each swapped pair once, from its target-0 member
            if k & cbit != 0 && k & tbit == 0 {
                self.amps.swap(k, k | tbit);
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, q: usize, pauli: Pauli) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.stride(q);
        let i = Complex64::new(0.0, 1.0);
        for chunk in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                match pauli {
                    Pauli::X => std::mem::swap(a0, a1),
                    Pauli::Y => {
                        let (x0, x1) = (*a0, *a1);
                        *a0 = -i * x1;
                        *a1 = i * x0;
                    }
                    Pauli::Z => *a1 = -*a1,
                }
            }
        }
        Ok(())
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(contract(format!("qubit count must be in 1..={MAX_QUBITS}, got {n}")));
    }
    Ok(())
}

/// Functional form of [`PureState::apply_ry`].
pub fn apply_ry(mut state: PureState, qubit: usize, angle: f64) -> Result<PureState> {
    state.apply_ry(qubit, angle)?;
    Ok(state)
}

/// Functional form of [`PureState::apply_cnot`].
pub fn apply_cnot(mut state: PureState, control: usize, target: usize) -> Result<PureState> {
    state.apply_cnot(control, target)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn probs(s: &PureState) -> Vec<f64> {
        s.amps().iter().map(|a| a.norm_sqr()).collect()
    }

    #[test]
    fn ry_examples() {
        let s = apply_ry(PureState::zero(1).unwrap(), 0, 0.0).unwrap();
        assert_eq!(s, PureState::zero(1).unwrap());
        let s = apply_ry(PureState::zero(1).unwrap(), 0, PI).unwrap();
        assert!(s.amps()[0].norm() < 1e-15 && (s.amps()[1].re - 1.0).abs() < 1e-15);
        let p = probs(&apply_ry(PureState::zero(1).unwrap(), 0, PI / 2.0).unwrap());
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cnot_truth_table_big_endian() {
        // |10>: qubit 0 set, index 0b10
        let s = apply_cnot(PureState::basis(2, 0b10).unwrap(), 0, 1).unwrap();
        assert_eq!(s, PureState::basis(2, 0b11).unwrap());
        let s = apply_cnot(PureState::zero(2).unwrap(), 0, 1).unwrap();
        assert_eq!(s, PureState::zero(2).unwrap());
        let s = apply_cnot(PureState::basis(2, 0b01).unwrap(), 0, 1).unwrap();
        assert_eq!(s, PureState::basis(2, 0b01).unwrap());
        let s = apply_cnot(PureState::basis(2, 0b01).unwrap(), 1, 0).unwrap();
        assert_eq!(s, PureState::basis(2, 0b11).unwrap());
    }

    #[test]
    fn ry_acts_on_most_significant_bit_for_qubit_zero() {
        let s = apply_ry(PureState::zero(3).unwrap(), 0, PI).unwrap();
        assert!((s.amps()[0b100].re - 1.0).abs() < 1e-15);
        let s = apply_ry(PureState::zero(3).unwrap(), 2, PI).unwrap();
        assert!((s.amps()[0b001].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_errors() {
        let s = PureState::zero(2).unwrap();
        assert!(apply_ry(s.clone(), 2, 0.1).is_err());
        assert!(apply_cnot(s.clone(), 1, 1).is_err());
        assert!(apply_cnot(s.clone(), 0, 5).is_err());
        assert!(PureState::zero(0).is_err());
        assert!(PureState::basis(2, 4).is_err());
        assert!(PureState::from_amps(vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn paulis_square_to_identity_up_to_phase() {
        let mut s = PureState::zero(2).unwrap();
        s.apply_ry(0, 0.7).unwrap();
        s.apply_ry(1, 1.9).unwrap();
        s.apply_cnot(0, 1).unwrap();
        let orig = s.clone();
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut t = orig.clone();
            t.apply_pauli(1, p).unwrap();
            assert!((t.norm_sqr() - 1.0).abs() < 1e-14);
            t.apply_pauli(1, p).unwrap();
            for (a, b) in t.amps().iter().zip(orig.amps()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
        let mut t = PureState::zero(1).unwrap();
        t.apply_pauli(0, Pauli::Y).unwrap();
        assert_eq!(t.amps()[1], Complex64::new(0.0, 1.0));
    }
}
