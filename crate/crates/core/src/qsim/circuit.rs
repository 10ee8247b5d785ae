use super::{ProbVector, PureState};
use crate::error::{config, contract, Error, Result};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Ry { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// Qubit the gate writes to (the rotated qubit or the CNOT target).
    pub fn target(&self) -> usize {
        match *self {
            Gate::Ry { qubit, .. } => qubit,
            Gate::Cnot { target, .. } => target,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match *self {
            Gate::Ry { qubit, angle } => {
                if qubit >= n {
                    return Err(contract(format!("RY on qubit {qubit} in a {n}-qubit circuit")));
                }
                if !angle.is_finite() {
                    return Err(contract(format!("RY angle {angle} is not finite")));
                }
            }
            Gate::Cnot { control, target } => {
                if control >= n || target >= n {
                    return Err(contract(format!("CNOT({control}, {target}) in a {n}-qubit circuit")));
                }
                if control == target {
                    return Err(contract(format!("CNOT control equals target ({control})")));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut PureState) -> Result<()> {
        match *self {
            Gate::Ry { qubit, angle } => state.apply_ry(qubit, angle),
            Gate::Cnot { control, target } => state.apply_cnot(control, target),
        }
    }
}

/// Ordered gate list acting on `|0>^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > super::MAX_QUBITS {
            return Err(contract(format!("qubit count must be in 1..={}, got {n}", super::MAX_QUBITS)));
        }
        Ok(Self { n, gates: Vec::new() })
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n)?;
        c.extend(gates)?;
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `QUBITS n` header, then one `RY q theta` or `CNOT c t` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.n);
        for g in &self.gates {
            match *g {
                Gate::Ry { qubit, angle } => writeln!(out, "RY {qubit} {angle:?}"),
                Gate::Cnot { control, target } => writeln!(out, "CNOT {control} {target}"),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let tok: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| s.parse::<usize>().map_err(|e| perr(format!("bad integer '{s}': {e}")));
            match (tok[0], &circuit) {
                ("QUBITS", None) if tok.len() == 2 => {
                    circuit = Some(Circuit::new(int(tok[1])?).map_err(|e| perr(e.to_string()))?);
                }
                ("QUBITS", Some(_)) => return Err(perr("duplicate QUBITS header".into())),
                (_, None) => return Err(perr("expected 'QUBITS n' header".into())),
                ("RY", Some(_)) if tok.len() == 3 => {
                    let angle = tok[2].parse::<f64>().map_err(|e| perr(format!("bad angle '{}': {e}", tok[2])))?;
                    let g = Gate::Ry { qubit: int(tok[1])?, angle };
                    circuit.as_mut().unwrap().push(g).map_err(|e| perr(e.to_string()))?;
                }
                ("CNOT", Some(_)) if tok.len() == 3 => {
                    let g = Gate::Cnot { control: int(tok[1])?, target: int(tok[2])? };
                    circuit.as_mut().unwrap().push(g).map_err(|e| perr(e.to_string()))?;
                }
                _ => return Err(perr(format!("unrecognized line '{line}'"))),
            }
        }
        circuit.ok_or(Error::Parse { line: 0, msg: "empty circuit file".into() })
    }
}

/// Block constructor.
///
/// For each angle: `RY(cursor)`, then `CNOT(cursor, cursor + 1)`, or
/// `CNOT(cursor, cursor - 1)` on the last qubit; the cursor then advances and
/// wraps to 0. A one-qubit register gets rotations only. Returns the gates
/// and the cursor where the next block continues.
pub fn build_block(n: usize, angles: &[f64], start_cursor: usize) -> Result<(Vec<Gate>, usize)> {
    if n == 0 {
        return Err(contract("block constructor needs at least one qubit"));
    }
    if start_cursor >= n {
        return Err(contract(format!("cursor {start_cursor} out of range for {n} qubits")));
    }
    let mut gates = Vec::with_capacity(2 * angles.len());
    let mut cursor = start_cursor;
    for &angle in angles {
        gates.push(Gate::Ry { qubit: cursor, angle });
        if n > 1 {
            let target = if cursor == n - 1 { cursor - 1 } else { cursor + 1 };
            gates.push(Gate::Cnot { control: cursor, target });
        }
        cursor = (cursor + 1) % n;
    }
    Ok((gates, cursor))
}

/// Three blocks loading `4 pi p_prev`, `4 pi x_in` and `beta`, with the
/// cursor carried from one block into the next.
pub fn build_reservoir_circuit(n: usize, p_prev: &ProbVector, x_in: &[f64], beta: &[f64]) -> Result<Circuit> {
    build_reservoir_circuit_scaled(n, p_prev.as_slice(), x_in, beta, 4.0 * PI)
}

pub(crate) fn build_reservoir_circuit_scaled(
    n: usize,
    p_prev: &[f64],
    x_in: &[f64],
    beta: &[f64],
    scale: f64,
) -> Result<Circuit> {
    if beta.len() != n {
        return Err(config(format!("beta has {} angles, expected {n}", beta.len())));
    }
    if p_prev.len() != 1 << n {
        return Err(contract(format!("previous probabilities have length {}, expected {}", p_prev.len(), 1usize << n)));
    }
    let mut circuit = Circuit::new(n)?;
    let scaled = |v: &[f64]| v.iter().map(|x| scale * x).collect::<Vec<_>>();
    let (g1, c) = build_block(n, &scaled(p_prev), 0)?;
    let (g2, c) = build_block(n, &scaled(x_in), c)?;
    let (g3, _) = build_block(n, beta, c)?;
    circuit.extend(g1.into_iter().chain(g2).chain(g3))?;
    Ok(circuit)
}

/// One block loading `4 pi [p_selected, x_in]`.
pub fn build_reduced_circuit(n: usize, p_selected: &[f64], x_in: &[f64]) -> Result<Circuit> {
    build_reduced_circuit_scaled(n, p_selected, x_in, 4.0 * PI)
}

pub(crate) fn build_reduced_circuit_scaled(n: usize, p_selected: &[f64], x_in: &[f64], scale: f64) -> Result<Circuit> {
    let (gates, _) = build_block(n, &reduced_angles(p_selected, x_in, scale), 0)?;
    Circuit::from_gates(n, gates)
}

/// `scale * [p_selected, x_in]`.
pub(crate) fn reduced_angles(p_selected: &[f64], x_in: &[f64], scale: f64) -> Vec<f64> {
    p_selected.iter().chain(x_in).map(|v| scale * v).collect()
}

pub fn run_circuit(circuit: &Circuit) -> Result<PureState> {
    let mut state = PureState::zero(circuit.n())?;
    for g in circuit.gates() {
        g.apply(&mut state)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::exact_probabilities;

    fn ry(qubit: usize, angle: f64) -> Gate {
        Gate::Ry { qubit, angle }
    }
    fn cx(control: usize, target: usize) -> Gate {
        Gate::Cnot { control, target }
    }

    #[test]
    fn block_examples_traced_by_hand() {
        let (g, c) = build_block(2, &[0.3], 0).unwrap();
        assert_eq!(g, vec![ry(0, 0.3), cx(0, 1)]);
        assert_eq!(c, 1);
        let (g, c) = build_block(2, &[0.3, 0.4], 0).unwrap();
        assert_eq!(g, vec![ry(0, 0.3), cx(0, 1), ry(1, 0.4), cx(1, 0)]);
        assert_eq!(c, 0);
        let (g, _) = build_block(3, &[0.1, 0.2, 0.3], 0).unwrap();
        assert_eq!(g.iter().filter(|g| matches!(g, Gate::Ry { .. })).count(), 3);
        assert_eq!(g.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count(), 3);
        let (g, c) = build_block(1, &[0.1, 0.2], 0).unwrap();
        assert_eq!(g, vec![ry(0, 0.1), ry(0, 0.2)]);
        assert_eq!(c, 0);
        let (g, c) = build_block(3, &[], 2).unwrap();
        assert!(g.is_empty());
        assert_eq!(c, 2);
    }

    #[test]
    fn cursor_threads_across_blocks() {
        // 4 probabilities leave the cursor at 0 for n = 2; one input then
        // lands on qubit 0 and the first beta angle on qubit 1.
        let p = ProbVector::uniform(2).unwrap();
        let c = build_reservoir_circuit(2, &p, &[0.5], &[0.7, 0.9]).unwrap();
        let g = c.gates();
        assert_eq!(g[8], ry(0, 4.0 * PI * 0.5));
        assert_eq!(g[10], ry(1, 0.7));
        assert_eq!(g[11], cx(1, 0));
        assert_eq!(g[12], ry(0, 0.9));
    }

    #[test]
    fn reservoir_gate_count_and_trivial_state() {
        for n in 2..=5 {
            let p = ProbVector::basis(n, 0).unwrap();
            let c = build_reservoir_circuit(n, &p, &[0.0; 3], &vec![0.0; n]).unwrap();
            assert_eq!(c.len(), 2 * ((1 << n) + 3 + n));
        }
        // all angles zero
        let p = vec![0.0; 8];
        let c = build_reservoir_circuit_scaled(3, &p, &[0.0, 0.0], &[0.0; 3], 4.0 * PI).unwrap();
        let probs = exact_probabilities(&run_circuit(&c).unwrap());
        assert_eq!(probs.as_slice()[0], 1.0);
        assert!(probs.as_slice()[1..].iter().all(|&v| v == 0.0));
        let c = build_reservoir_circuit(9, &ProbVector::uniform(9).unwrap(), &[0.1, 0.2, 0.3], &[0.0; 9]).unwrap();
        assert_eq!(c.gates().iter().filter(|g| matches!(g, Gate::Ry { .. })).count(), 512 + 3 + 9);
        assert!(build_reservoir_circuit(3, &ProbVector::uniform(3).unwrap(), &[0.1], &[0.0; 2]).is_err());
    }

    #[test]
    fn reduced_circuit_counts() {
        let c = build_reduced_circuit(7, &[0.01; 14], &[0.2, 0.3]).unwrap();
        assert_eq!(c.len(), 32);
        assert_eq!(c, build_reduced_circuit(7, &[0.01; 14], &[0.2, 0.3]).unwrap());
        let c = build_reduced_circuit(4, &[], &[]).unwrap();
        assert!(c.is_empty());
        assert_eq!(run_circuit(&c).unwrap(), PureState::zero(4).unwrap());
    }

    #[test]
    fn ry_composition() {
        let a = Circuit::from_gates(2, vec![ry(1, 0.4), ry(1, 1.1)]).unwrap();
        let b = Circuit::from_gates(2, vec![ry(1, 1.5)]).unwrap();
        let (sa, sb) = (run_circuit(&a).unwrap(), run_circuit(&b).unwrap());
        for (x, y) in sa.amps().iter().zip(sb.amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(ry(2, 0.0)).is_err());
        assert!(c.push(cx(0, 0)).is_err());
        assert!(c.push(ry(0, f64::NAN)).is_err());
        assert!(build_block(2, &[0.1], 2).is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = build_reduced_circuit(3, &[0.123456789012345, 1.0 / 3.0], &[0.7]).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("QUBITS 3\nRY 0 "));
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
        let err = Circuit::from_text("QUBITS 2\nRY 0 0.1\nCNOT 0 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(Circuit::from_text("RY 0 0.1\n").is_err());
        assert!(Circuit::from_text("QUBITS 2\nH 0\n").is_err());
    }
}
