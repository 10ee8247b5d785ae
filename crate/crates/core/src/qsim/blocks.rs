use super::{exact_probabilities, Circuit, Gate, ProbVector, PureState};
use crate::error::{config, Result};
use std::ops::Range;

/// Split of `n` qubits into contiguous blocks of size `p` plus a trailing
/// remainder block of size `n mod p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    p: usize,
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n == 0 || n > super::MAX_QUBITS {
            return Err(config(format!("qubit count must be in 1..={}, got {n}", super::MAX_QUBITS)));
        }
        if p == 0 || p > n {
            return Err(config(format!("block size p = {p} must be in 1..={n}")));
        }
        let blocks = (0..n).step_by(p).map(|s| s..(s + p).min(n)).collect();
        Ok(Self { n, p, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.p
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn full_blocks(&self) -> usize {
        self.n / self.p
    }

    fn block_of(&self, q: usize) -> &Range<usize> {
        &self.blocks[q / self.p]
    }
}

/// The block constructor with every CNOT confined to the cursor's block.
///
/// Rotations follow the global cursor cycle `0, 1, ..., n-1, 0, ...`; the
/// CNOT after each rotation targets the next qubit of the same block, or the
/// previous one at a block's last qubit, and is dropped in a one-qubit
/// block. With `p = n` this is exactly [`build_block`](super::build_block).
pub fn build_blocked_gates(partition: &BlockPartition, angles: &[f64]) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(2 * angles.len());
    for (i, &angle) in angles.iter().enumerate() {
        let q = i % partition.n;
        gates.push(Gate::Ry { qubit: q, angle });
        let b = partition.block_of(q);
        if b.len() > 1 {
            let target = if q + 1 == b.end { q - 1 } else { q + 1 };
            gates.push(Gate::Cnot { control: q, target });
        }
    }
    gates
}

/// Outcome distribution of the blocked constructor, computed block by block
/// and combined as a tensor product.
pub fn run_blocked_circuit(partition: &BlockPartition, angles: &[f64]) -> Result<ProbVector> {
    let mut per_block: Vec<Circuit> = partition.blocks.iter().map(|b| Circuit::new(b.len())).collect::<Result<_>>()?;
    for g in build_blocked_gates(partition, angles) {
        let bi = g.target() / partition.p;
        let off = partition.blocks[bi].start;
        let local = match g {
            Gate::Ry { qubit, angle } => Gate::Ry { qubit: qubit - off, angle },
            Gate::Cnot { control, target } => Gate::Cnot { control: control - off, target: target - off },
        };
        per_block[bi].push(local)?;
    }
    let mut out: Option<ProbVector> = None;
    for c in &per_block {
        let mut state = PureState::zero(c.n())?;
        for g in c.gates() {
            g.apply(&mut state)?;
        }
        let p = exact_probabilities(&state);
        out = Some(match out {
            None => p,
            Some(acc) => acc.tensor(&p),
        });
    }
    Ok(out.expect("a partition has at least one block"))
}
