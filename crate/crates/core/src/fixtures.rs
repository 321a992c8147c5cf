//! Standard stabilizer groups.

use crate::error::Result;
use crate::linalg::RingParams;
use crate::pauli::PauliOp;
use crate::stabilizer::{Partition, StabilizerGroup};

const LABELS: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn one_per_party(n: usize) -> Result<Partition> {
    Partition::from_assignment(&LABELS[..n.min(LABELS.len())], &(0..n).collect::<Vec<_>>())
}

/// `Σ_k |k...k⟩` on `n` qudits, one per party: `⟨X^{⊗n}, Z_0 Z_i^{-1}⟩`.
pub fn ghz(ring: RingParams, n: usize) -> Result<StabilizerGroup> {
    let d = ring.d();
    let mut gens = vec![PauliOp::new(ring, vec![1; n], vec![0; n], 0)?];
    for i in 1..n {
        let mut z = vec![0; n];
        z[0] = 1;
        z[i] = d - 1;
        gens.push(PauliOp::new(ring, vec![0; n], z, 0)?);
    }
    StabilizerGroup::new(ring, n, gens, one_per_party(n)?)
}

/// Maximally entangled pair between parties `a` and `b`.
pub fn epr(ring: RingParams) -> Result<StabilizerGroup> {
    let d = ring.d();
    let gens = vec![PauliOp::new(ring, vec![1, 1], vec![0, 0], 0)?, PauliOp::new(ring, vec![0, 0], vec![1, d - 1], 0)?];
    StabilizerGroup::new(ring, 2, gens, one_per_party(2)?)
}

/// `|0...0⟩` with qudit `q` in party `assignment[q]` of `labels`.
pub fn zero_product(ring: RingParams, labels: &[&str], assignment: &[usize]) -> Result<StabilizerGroup> {
    let n = assignment.len();
    let gens = (0..n).map(|q| PauliOp::single(ring, n, q, 0, 1)).collect();
    StabilizerGroup::new(ring, n, gens, Partition::from_assignment(labels, assignment)?)
}
