//! Local operations, symbolically: Cliffords as symplectic matrices with phase
//! images, the digit-shifting `V` gate, Pauli frame corrections, and the
//! operation log replayed by the oracle.
//!
//! A Clifford on `m` local qudits stores, for each basis operator
//! `X_0..X_{m-1}, Z_0..Z_{m-1}`, its image `U σ U† = ω^{γ/2} σ_{M e_i}`:
//! column `i` of `M` and doubled phase `phases[i]`. Images of other Paulis
//! follow from `X^x Z^z = Π X_i^{x_i} Π Z_i^{z_i}` in that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, howell_form, inverse, solve, ModMatrix, ModVec, RingParams};
use crate::pauli::PauliOp;
use crate::stabilizer::StabilizerGroup;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum ElementaryGate {
    /// `D^{-1/2} Σ ω^{jk} |j⟩⟨k|`.
    Fourier {
        q: usize,
    },
    /// `P^k`, `P = Σ ω^{j²/2} |j⟩⟨j|` (even `D`) or `Σ ω^{j² (D+1)/2}` (odd `D`).
    Phase {
        q: usize,
        k: u64,
    },
    /// `Σ ω^{k j l} |j, l⟩⟨j, l|`.
    Cz {
        a: usize,
        b: usize,
        k: u64,
    },
    /// `|j⟩ ↦ |a j⟩` for a unit `a`.
    Mult {
        q: usize,
        a: u64,
    },
    PauliX {
        q: usize,
        e: u64,
    },
    PauliZ {
        q: usize,
        e: u64,
    },
    GlobalPhase {
        gamma2: u64,
    },
}

impl ElementaryGate {
    pub fn qudits(&self) -> Vec<usize> {
        match *self {
            ElementaryGate::Fourier { q }
            | ElementaryGate::Phase { q, .. }
            | ElementaryGate::Mult { q, .. }
            | ElementaryGate::PauliX { q, .. }
            | ElementaryGate::PauliZ { q, .. } => vec![q],
            ElementaryGate::Cz { a, b, .. } => vec![a, b],
            ElementaryGate::GlobalPhase { .. } => vec![],
        }
    }

    /// The gate as a Clifford on [`Self::qudits`].
    pub fn to_clifford(&self, ring: RingParams, party: &str) -> Result<LocalClifford> {
        let d = ring.d();
        let qudits = self.qudits();
        let m = qudits.len();
        let mut c = LocalClifford::identity(ring, party, qudits);
        let mut set = |i: usize, x: &[u64], z: &[u64], g2: u64| {
            for q in 0..m {
                c.symplectic.set(q, i, x[q]);
                c.symplectic.set(m + q, i, z[q]);
            }
            c.phases[i] = g2 % (2 * d);
        };
        match *self {
            ElementaryGate::Fourier { .. } => {
                set(0, &[0], &[1], 0);
                set(1, &[d - 1], &[0], 0);
            }
            ElementaryGate::Phase { k, .. } => {
                let g1 = if d.is_multiple_of(2) { 1 } else { d + 1 };
                set(0, &[1], &[k % d], ((k % (2 * d)) * g1) % (2 * d));
            }
            ElementaryGate::Cz { a, b, k } => {
                if a == b {
                    return Err(Error::Precondition("CZ needs two distinct qudits".into()));
                }
                set(0, &[1, 0], &[0, k], 0);
                set(1, &[0, 1], &[k, 0], 0);
            }
            ElementaryGate::Mult { a, .. } => {
                let inv = ring.inv(a).ok_or(Error::NotInvertible(d))?;
                set(0, &[a % d], &[0], 0);
                set(1, &[0], &[inv], 0);
            }
            ElementaryGate::PauliX { e, .. } => {
                set(1, &[0], &[1], 2 * ring.neg(e));
            }
            ElementaryGate::PauliZ { e, .. } => {
                set(0, &[1], &[0], 2 * (e % d));
            }
            ElementaryGate::GlobalPhase { .. } => {}
        }
        Ok(c)
    }

    /// `U op U†`.
    pub fn conjugate(&self, op: &PauliOp) -> Result<PauliOp> {
        self.to_clifford(op.ring, "")?.conjugate(op)
    }

    /// In-place action on a local `(x; z)` vector of `m` qudits.
    fn act_vec(&self, ring: RingParams, m: usize, v: &mut [u64]) {
        match *self {
            ElementaryGate::Fourier { q } => {
                let (x, z) = (v[q], v[m + q]);
                v[q] = ring.neg(z);
                v[m + q] = x;
            }
            ElementaryGate::Phase { q, k } => v[m + q] = ring.add(v[m + q], ring.mul(k, v[q])),
            ElementaryGate::Cz { a, b, k } => {
                v[m + a] = ring.add(v[m + a], ring.mul(k, v[b]));
                v[m + b] = ring.add(v[m + b], ring.mul(k, v[a]));
            }
            ElementaryGate::Mult { q, a } => {
                v[q] = ring.mul(a, v[q]);
                v[m + q] = ring.mul(ring.inv(a).expect("unit multiplier"), v[m + q]);
            }
            ElementaryGate::PauliX { .. } | ElementaryGate::PauliZ { .. } | ElementaryGate::GlobalPhase { .. } => {}
        }
    }

    fn relabel(&self, map: &[usize]) -> ElementaryGate {
        match *self {
            ElementaryGate::Fourier { q } => ElementaryGate::Fourier { q: map[q] },
            ElementaryGate::Phase { q, k } => ElementaryGate::Phase { q: map[q], k },
            ElementaryGate::Cz { a, b, k } => ElementaryGate::Cz { a: map[a], b: map[b], k },
            ElementaryGate::Mult { q, a } => ElementaryGate::Mult { q: map[q], a },
            ElementaryGate::PauliX { q, e } => ElementaryGate::PauliX { q: map[q], e },
            ElementaryGate::PauliZ { q, e } => ElementaryGate::PauliZ { q: map[q], e },
            ElementaryGate::GlobalPhase { gamma2 } => ElementaryGate::GlobalPhase { gamma2 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalClifford {
    pub party: String,
    /// Global indices of the local qudits; local index `i` is `qudits[i]`.
    pub qudits: Vec<usize>,
    pub ring: RingParams,
    /// `2m x 2m`; column `i` is the image of basis operator `i`.
    pub symplectic: ModMatrix,
    /// Doubled phases of the basis images.
    pub phases: Vec<u64>,
}

/// `u^T Ω v` on stacked local vectors.
pub(crate) fn omega(ring: RingParams, u: &[u64], v: &[u64]) -> u64 {
    let m = u.len() / 2;
    (0..m).fold(0, |acc, q| ring.add(acc, ring.sub(ring.mul(u[q], v[m + q]), ring.mul(u[m + q], v[q]))))
}

/// Doubled phase making `ω^{γ/2} σ_v` an order-`D` operator: `z·x mod 2`
/// for even `D`, zero for odd `D`.
fn canonical_phase(ring: RingParams, v: &[u64]) -> u64 {
    if ring.d() % 2 == 1 {
        return 0;
    }
    let m = v.len() / 2;
    dot(ring, &v[m..], &v[..m]) % 2
}

impl LocalClifford {
    pub fn identity(ring: RingParams, party: &str, qudits: Vec<usize>) -> Self {
        let m = qudits.len();
        LocalClifford {
            party: party.to_string(),
            qudits,
            ring,
            symplectic: ModMatrix::identity(ring, 2 * m),
            phases: vec![0; 2 * m],
        }
    }

    /// Clifford with symplectic part `m` and the canonical phase choice.
    pub fn from_symplectic(ring: RingParams, party: &str, qudits: Vec<usize>, m: ModMatrix) -> Result<Self> {
        if m.rows != 2 * qudits.len() || m.cols != m.rows {
            return Err(Error::DimensionMismatch("symplectic matrix does not match the qudit list".into()));
        }
        let phases = (0..m.cols).map(|i| canonical_phase(ring, &m.col(i))).collect();
        let c = LocalClifford { party: party.to_string(), qudits, ring, symplectic: m, phases };
        if !c.is_symplectic() {
            return Err(Error::NotSymplectic(ring.d()));
        }
        Ok(c)
    }

    pub fn num_local(&self) -> usize {
        self.qudits.len()
    }

    /// `M^T Ω M = Ω`.
    pub fn is_symplectic(&self) -> bool {
        let n = self.symplectic.cols;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = omega(self.ring, &unit(self.ring, n, i), &unit(self.ring, n, j));
                omega(self.ring, &self.symplectic.col(i), &self.symplectic.col(j)) == want
            })
        })
    }

    /// Image of local basis operator `i` as an `m`-qudit operator.
    pub fn image(&self, i: usize) -> PauliOp {
        let mut p = PauliOp::from_symplectic(self.ring, &self.symplectic.col(i));
        p.gamma2 = self.phases[i];
        p
    }

    /// Image of a local `m`-qudit operator.
    pub fn conjugate_local(&self, op: &PauliOp) -> Result<PauliOp> {
        let m = self.num_local();
        if op.num_qudits() != m {
            return Err(Error::DimensionMismatch("local operator width".into()));
        }
        let mut acc = PauliOp::identity(self.ring, m).with_phase(op.gamma2 as i64);
        for i in 0..m {
            if op.x[i] != 0 {
                acc = acc.multiply(&self.image(i).pow(op.x[i]))?;
            }
        }
        for i in 0..m {
            if op.z[i] != 0 {
                acc = acc.multiply(&self.image(m + i).pow(op.z[i]))?;
            }
        }
        Ok(acc)
    }

    /// `U op U†` for a global operator.
    pub fn conjugate(&self, op: &PauliOp) -> Result<PauliOp> {
        if op.ring != self.ring {
            return Err(Error::RingMismatch(self.ring.d(), op.d()));
        }
        if let Some(&q) = self.qudits.iter().find(|&&q| q >= op.num_qudits()) {
            return Err(Error::DimensionMismatch(format!("Clifford acts on qudit {q}")));
        }
        let local = op.restrict(&self.qudits).with_phase(op.gamma2 as i64);
        let img = self.conjugate_local(&local)?;
        let mut out = op.clone();
        for (i, &q) in self.qudits.iter().enumerate() {
            out.x[q] = img.x[i];
            out.z[q] = img.z[i];
        }
        out.gamma2 = img.gamma2;
        Ok(out)
    }

    /// `self` followed by `next` (same qudits).
    pub fn then(&self, next: &LocalClifford) -> Result<LocalClifford> {
        if self.qudits != next.qudits {
            return Err(Error::DimensionMismatch("composed Cliffords act on different qudits".into()));
        }
        let n = 2 * self.num_local();
        let mut out = self.clone();
        for i in 0..n {
            let img = next.conjugate_local(&self.image(i))?;
            let v = img.symplectic();
            for (r, &e) in v.iter().enumerate() {
                out.symplectic.set(r, i, e);
            }
            out.phases[i] = img.gamma2;
        }
        Ok(out)
    }

    /// Elementary gates on the global qudits whose product realizes this
    /// Clifford exactly (up to a global phase), applied in list order.
    pub fn compile_to_elementary(&self) -> Result<Vec<ElementaryGate>> {
        let ring = self.ring;
        let m = self.num_local();
        let n2 = 2 * m;
        let mut a = inverse(&self.symplectic).ok_or(Error::NotSymplectic(ring.d()))?;
        let mut gates: Vec<ElementaryGate> = Vec::new();
        let mut push = |g: ElementaryGate, a: &mut ModMatrix| {
            for c in 0..n2 {
                let mut col = a.col(c);
                g.act_vec(ring, m, &mut col);
                for (r, &e) in col.iter().enumerate() {
                    a.set(r, c, e);
                }
            }
            gates.push(g);
        };
        let unit_of = |x: u64| ring.is_unit(x);

        for i in 0..m {
            let xcol = |a: &ModMatrix| a.col(i);
            // Column of X_i to e_{x_i}.
            let v = xcol(&a);
            if !unit_of(v[i]) {
                if let Some(q) = (i..m).find(|&q| unit_of(v[q])) {
                    let lam = ring.mul(ring.sub(1, v[m + i]), ring.inv(v[q]).unwrap());
                    push(ElementaryGate::Cz { a: i, b: q, k: lam }, &mut a);
                    push(ElementaryGate::Fourier { q: i }, &mut a);
                } else {
                    let q = (i..m)
                        .find(|&q| unit_of(v[m + q]))
                        .ok_or_else(|| Error::Synthesis("column has no unit entry".into()))?;
                    push(ElementaryGate::Fourier { q }, &mut a);
                    if q != i {
                        let v = xcol(&a);
                        let lam = ring.mul(ring.sub(1, v[m + i]), ring.inv(v[q]).unwrap());
                        push(ElementaryGate::Cz { a: i, b: q, k: lam }, &mut a);
                        push(ElementaryGate::Fourier { q: i }, &mut a);
                    }
                }
            }
            let v = xcol(&a);
            if v[i] != 1 {
                push(ElementaryGate::Mult { q: i, a: ring.inv(v[i]).unwrap() }, &mut a);
            }
            for q in i + 1..m {
                let v = xcol(&a);
                if v[m + q] != 0 {
                    push(ElementaryGate::Cz { a: i, b: q, k: ring.neg(v[m + q]) }, &mut a);
                }
                let v = xcol(&a);
                if v[q] != 0 {
                    push(ElementaryGate::Fourier { q }, &mut a);
                    let v = xcol(&a);
                    push(ElementaryGate::Cz { a: i, b: q, k: ring.neg(v[m + q]) }, &mut a);
                }
            }
            let v = xcol(&a);
            if v[m + i] != 0 {
                push(ElementaryGate::Phase { q: i, k: ring.neg(v[m + i]) }, &mut a);
            }

            // Column of Z_i to e_{z_i}, keeping e_{x_i} (conjugated to e_{z_i} meanwhile).
            push(ElementaryGate::Fourier { q: i }, &mut a);
            let zcol = |a: &ModMatrix| a.col(m + i);
            for q in i + 1..m {
                let v = zcol(&a);
                if v[m + q] != 0 {
                    push(ElementaryGate::Cz { a: i, b: q, k: v[m + q] }, &mut a);
                }
                let v = zcol(&a);
                if v[q] != 0 {
                    push(ElementaryGate::Fourier { q }, &mut a);
                    let v = zcol(&a);
                    push(ElementaryGate::Cz { a: i, b: q, k: v[m + q] }, &mut a);
                }
            }
            let v = zcol(&a);
            if v[m + i] != 0 {
                push(ElementaryGate::Phase { q: i, k: v[m + i] }, &mut a);
            }
            for _ in 0..3 {
                push(ElementaryGate::Fourier { q: i }, &mut a);
            }
        }
        if a != ModMatrix::identity(ring, n2) {
            return Err(Error::Synthesis("symplectic reduction did not reach the identity".into()));
        }

        // Phase correction by a Pauli applied last.
        let mut got = LocalClifford::identity(ring, &self.party, (0..m).collect());
        for g in &gates {
            got = got.then(&g.to_clifford(ring, &self.party)?.embed(m)?)?;
        }
        let two_d = 2 * ring.d();
        let mut rows = Vec::with_capacity(n2);
        let mut rhs = Vec::with_capacity(n2);
        for i in 0..n2 {
            let diff = (self.phases[i] + two_d - got.phases[i]) % two_d;
            if !diff.is_multiple_of(2) {
                return Err(Error::InvalidPhase(format!("image {i} has a phase of the wrong parity")));
            }
            let col = self.symplectic.col(i);
            // c(P, σ) = x_σ·f - z_σ·e over unknowns (e; f).
            let mut row: Vec<u64> = col[m..].iter().map(|&z| ring.neg(z)).collect();
            row.extend_from_slice(&col[..m]);
            rows.push(row);
            rhs.push(diff / 2);
        }
        let sys = ModMatrix::from_rows(ring, n2, &rows)?;
        let sol = solve(&sys, &ModVec { ring, entries: rhs })?
            .ok_or_else(|| Error::Synthesis("no Pauli matches the phase images".into()))?;
        for q in 0..m {
            if sol.entries[m + q] != 0 {
                gates.push(ElementaryGate::PauliZ { q, e: sol.entries[m + q] });
            }
            if sol.entries[q] != 0 {
                gates.push(ElementaryGate::PauliX { q, e: sol.entries[q] });
            }
        }
        Ok(gates.iter().map(|g| g.relabel(&self.qudits)).collect())
    }

    /// Re-expresses a Clifford on local indices `0..k` (its `qudits` taken as
    /// local indices) as a Clifford on all `m` local qudits.
    pub(crate) fn embed(&self, m: usize) -> Result<LocalClifford> {
        let k = self.num_local();
        let mut out = LocalClifford::identity(self.ring, &self.party, (0..m).collect());
        for (i, &qi) in self.qudits.iter().enumerate() {
            if qi >= m {
                return Err(Error::DimensionMismatch("gate outside the local register".into()));
            }
            for (basis, local_basis) in [(qi, i), (m + qi, k + i)] {
                let img = self.image(local_basis);
                for r in 0..2 * m {
                    out.symplectic.set(r, basis, 0);
                }
                for (j, &qj) in self.qudits.iter().enumerate() {
                    out.symplectic.set(qj, basis, img.x[j]);
                    out.symplectic.set(m + qj, basis, img.z[j]);
                }
                out.phases[basis] = img.gamma2;
            }
        }
        Ok(out)
    }
}

fn unit(ring: RingParams, n: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0; n];
    v[i] = 1 % ring.d();
    v
}

fn axpy(ring: RingParams, y: &mut [u64], a: u64, x: &[u64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = ring.add(*yi, ring.mul(a, xi));
    }
}

/// Projection of `v` onto the symplectic complement of hyperbolic pairs.
fn project(ring: RingParams, v: &[u64], pairs: &[(Vec<u64>, Vec<u64>)]) -> Vec<u64> {
    let mut out = v.to_vec();
    for (a, b) in pairs {
        let wb = omega(ring, &out, b);
        let wa = omega(ring, &out, a);
        axpy(ring, &mut out, ring.neg(wb), a);
        axpy(ring, &mut out, wa, b);
    }
    out
}

/// Extends mutually orthogonal hyperbolic pairs `(a_i, b_i)`, `ω(a_i, b_i) = 1`,
/// to a symplectic basis. Returns `B` with `B e_{x_i} = a_i`, `B e_{z_i} = b_i`.
fn complete_symplectic_basis(ring: RingParams, m: usize, mut pairs: Vec<(Vec<u64>, Vec<u64>)>) -> Result<ModMatrix> {
    let n2 = 2 * m;
    while pairs.len() < m {
        let cands: Vec<Vec<u64>> = (0..n2).map(|i| project(ring, &unit(ring, n2, i), &pairs)).collect();
        let mut found = None;
        'outer: for i in 0..n2 {
            for j in i + 1..n2 {
                let w = omega(ring, &cands[i], &cands[j]);
                if ring.is_unit(w) {
                    found = Some((i, j, w));
                    break 'outer;
                }
            }
        }
        let (i, j, w) = found.ok_or_else(|| Error::Synthesis("symplectic completion found no unit pairing".into()))?;
        let winv = ring.inv(w).unwrap();
        let b: Vec<u64> = cands[j].iter().map(|&e| ring.mul(e, winv)).collect();
        pairs.push((cands[i].clone(), b));
    }
    let mut bm = ModMatrix::zeros(ring, n2, n2);
    for (i, (a, b)) in pairs.iter().enumerate() {
        for r in 0..n2 {
            bm.set(r, i, a[r]);
            bm.set(r, m + i, b[r]);
        }
    }
    Ok(bm)
}

/// Power-of-`p` part of a local vector: `u = p^{n-k} u0` with `u0` unimodular.
pub(crate) fn split_order(ring: RingParams, u: &[u64]) -> Result<(u32, Vec<u64>)> {
    let (p, n) = ring.expect_pn()?;
    let val = u.iter().map(|&e| ring.valuation(e)).collect::<Result<Vec<_>>>()?.into_iter().min().unwrap_or(n);
    if val == n {
        return Ok((0, vec![0; u.len()]));
    }
    let s = p.pow(val);
    Ok((n - val, u.iter().map(|&e| e / s).collect()))
}

/// Clifford mapping the local vector `u` (order `p^k`) to `p^{n-k} e_{z_0}`.
pub fn synth_map_to_z(ring: RingParams, party: &str, qudits: &[usize], u: &[u64], k: u32) -> Result<LocalClifford> {
    let m = qudits.len();
    if u.len() != 2 * m {
        return Err(Error::DimensionMismatch("local vector width".into()));
    }
    let (order, u0) = split_order(ring, u)?;
    if order != k || k == 0 {
        return Err(Error::Precondition(format!("vector has order p^{order}, expected p^{k}")));
    }
    // a with ω(a, u0) = 1: ω(e_{x_q}, u0) = z_q, ω(e_{z_q}, u0) = -x_q.
    let n2 = 2 * m;
    let a = (0..m)
        .find_map(|q| {
            if ring.is_unit(u0[m + q]) {
                Some(unit(ring, n2, q).iter().map(|&e| ring.mul(e, ring.inv(u0[m + q]).unwrap())).collect::<Vec<_>>())
            } else if ring.is_unit(u0[q]) {
                let c = ring.neg(ring.inv(u0[q]).unwrap());
                Some(unit(ring, n2, m + q).iter().map(|&e| ring.mul(e, c)).collect())
            } else {
                None
            }
        })
        .expect("unimodular vector has a unit entry");
    let b = complete_symplectic_basis(ring, m, vec![(a, u0)])?;
    let c = inverse(&b).ok_or(Error::NotSymplectic(ring.d()))?;
    LocalClifford::from_symplectic(ring, party, qudits.to_vec(), c)
}

/// Clifford mapping the local vector `g` to `e_{x_0}` while fixing
/// `p^{n-n'} e_{z_0}`. Requires `x_0(g) ≡ 1 (mod p^{n'})`.
pub fn synth_map_to_x_fixing_z(
    ring: RingParams,
    party: &str,
    qudits: &[usize],
    g: &[u64],
    n_prime: u32,
) -> Result<LocalClifford> {
    let (p, n) = ring.expect_pn()?;
    let m = qudits.len();
    if g.len() != 2 * m || m == 0 {
        return Err(Error::DimensionMismatch("local vector width".into()));
    }
    if n_prime == 0 || n_prime > n || g[0] % p.pow(n_prime) != 1 % p.pow(n_prime) {
        return Err(Error::Precondition(format!("x-exponent {} on the first qudit is not 1 modulo p^{n_prime}", g[0])));
    }
    // w = x_0^{-1} e_{z_0}: ω(g, w) = 1 and p^{n-n'} w = p^{n-n'} e_{z_0}.
    let mut w = vec![0; 2 * m];
    w[m] = ring.inv(g[0]).expect("unit by precondition");
    let b = complete_symplectic_basis(ring, m, vec![(g.to_vec(), w)])?;
    let c = inverse(&b).ok_or(Error::NotSymplectic(ring.d()))?;
    LocalClifford::from_symplectic(ring, party, qudits.to_vec(), c)
}

/// Symplectic matrix over `Z_p` mapping every vector in `restrictions`
/// (taken mod `p`, pairwise `ω`-orthogonal) into the span of the `e_z`.
pub fn diagonalize_local_group(ring_p: RingParams, m: usize, restrictions: &[Vec<u64>]) -> Result<ModMatrix> {
    let n2 = 2 * m;
    for (i, u) in restrictions.iter().enumerate() {
        for v in &restrictions[i + 1..] {
            if omega(ring_p, u, v) != 0 {
                return Err(Error::Precondition("restrictions do not commute modulo p".into()));
            }
        }
    }
    let span = howell_form(&ModMatrix::from_rows(ring_p, n2, restrictions)?);
    let mut pairs: Vec<(Vec<u64>, Vec<u64>)> = Vec::new();
    for r in 0..span.basis.rows {
        let b = project(ring_p, span.basis.row(r), &pairs);
        let a = (0..n2)
            .map(|i| project(ring_p, &unit(ring_p, n2, i), &pairs))
            .find(|c| omega(ring_p, c, &b) != 0)
            .ok_or_else(|| Error::Synthesis("isotropic vector has no partner".into()))?;
        let s = ring_p.inv(omega(ring_p, &a, &b)).unwrap();
        pairs.push((a.iter().map(|&e| ring_p.mul(e, s)).collect(), b));
    }
    let b = complete_symplectic_basis(ring_p, m, pairs)?;
    inverse(&b).ok_or(Error::NotSymplectic(ring_p.d()))
}

/// Lifts a symplectic matrix over `Z_p` to one over `ring = Z_{p^n}` that is
/// congruent mod `p`, by symplectic Gram-Schmidt on its column pairs.
pub fn lift_symplectic(m_p: &ModMatrix, ring: RingParams) -> Result<ModMatrix> {
    let n2 = m_p.cols;
    let m = n2 / 2;
    let ring_p = m_p.ring;
    for i in 0..n2 {
        for j in 0..n2 {
            let want = omega(ring_p, &unit(ring_p, n2, i), &unit(ring_p, n2, j));
            if omega(ring_p, &m_p.col(i), &m_p.col(j)) != want {
                return Err(Error::NotSymplectic(ring_p.d()));
            }
        }
    }
    let mut pairs: Vec<(Vec<u64>, Vec<u64>)> = Vec::new();
    for i in 0..m {
        let a = project(ring, &m_p.col(i), &pairs);
        let b = project(ring, &m_p.col(m + i), &pairs);
        let w = omega(ring, &a, &b);
        let winv = ring.inv(w).ok_or(Error::NotSymplectic(ring.d()))?;
        pairs.push((a, b.iter().map(|&e| ring.mul(e, winv)).collect()));
    }
    let mut out = ModMatrix::zeros(ring, n2, n2);
    for (i, (a, b)) in pairs.iter().enumerate() {
        for r in 0..n2 {
            out.set(r, i, a[r]);
            out.set(r, m + i, b[r]);
        }
    }
    Ok(out)
}

/// Local Clifford over `Z_{p^n}` bringing every restriction to the form
/// `x ≡ 0 (mod p)`. The restrictions must commute mod `p`.
pub fn diagonalizing_clifford(
    ring: RingParams,
    party: &str,
    qudits: &[usize],
    restrictions: &[Vec<u64>],
) -> Result<LocalClifford> {
    let (p, _) = ring.expect_pn()?;
    let ring_p = RingParams::new(p)?;
    let reduced: Vec<Vec<u64>> = restrictions.iter().map(|r| r.iter().map(|&e| e % p).collect()).collect();
    let c_p = diagonalize_local_group(ring_p, qudits.len(), &reduced)?;
    let c = if ring.d() == p { c_p } else { lift_symplectic(&c_p, ring)? };
    LocalClifford::from_symplectic(ring, party, qudits.to_vec(), ModMatrix::from_rows(ring, c.cols, &c.rows_vec())?)
}

pub fn apply_clifford_to_group(s: &StabilizerGroup, c: &LocalClifford) -> Result<StabilizerGroup> {
    let party = s.partition.index_of(&c.party)?;
    let own = s.partition.qudits(party);
    if let Some(q) = c.qudits.iter().find(|q| !own.contains(q)) {
        return Err(Error::Precondition(format!("qudit {q} is not in party '{}'", c.party)));
    }
    if !c.is_symplectic() {
        return Err(Error::NotSymplectic(c.ring.d()));
    }
    apply_clifford_unchecked(s, c)
}

pub(crate) fn apply_clifford_unchecked(s: &StabilizerGroup, c: &LocalClifford) -> Result<StabilizerGroup> {
    let gens = s.gens.iter().map(|g| c.conjugate(g)).collect::<Result<Vec<_>>>()?;
    Ok(StabilizerGroup { gens, ..s.clone() })
}

pub fn apply_gate_to_group(s: &StabilizerGroup, g: &ElementaryGate) -> Result<StabilizerGroup> {
    let c = g.to_clifford(s.ring, "")?;
    apply_clifford_unchecked(s, &c)
}

/// `P g P† = ω^{c(P, g)} g` applied to every generator.
pub fn apply_pauli_to_group(s: &StabilizerGroup, p: &PauliOp) -> Result<StabilizerGroup> {
    let two_d = 2 * s.ring.d();
    let gens = s
        .gens
        .iter()
        .map(|g| {
            let c = crate::pauli::commutation_phase(p, g)?;
            Ok(PauliOp { gamma2: (g.gamma2 + 2 * c) % two_d, ..g.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilizerGroup { gens, ..s.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VGate {
    pub party: String,
    pub qudit: usize,
    pub ring: RingParams,
}

/// Conjugates by `V` on `q`: local `(p a, b) ↦ (a, p b)`, phases kept, and
/// `X_q^{p^{n-1}}` appended. Requires `Z_q^{p^{n-1}} ∈ S` with phase zero.
pub fn apply_v_gate_to_group(s: &StabilizerGroup, v: &VGate) -> Result<StabilizerGroup> {
    let (p, n) = s.ring.expect_pn()?;
    if v.ring != s.ring {
        return Err(Error::RingMismatch(s.ring.d(), v.ring.d()));
    }
    let q = v.qudit;
    if q >= s.n {
        return Err(Error::DimensionMismatch(format!("qudit {q} out of range")));
    }
    let top = p.pow(n - 1);
    let zt = PauliOp::single(s.ring, s.n, q, 0, top);
    match s.commutant_phase_lookup(&zt) {
        Ok(0) => {}
        _ => {
            return Err(Error::Precondition(format!("Z_{q}^{top} is not a phase-free stabilizer")));
        }
    }
    let mut gens = Vec::with_capacity(s.gens.len() + 1);
    for g in &s.gens {
        let mut h = g.clone();
        h.x[q] = g.x[q] / p;
        h.z[q] = s.ring.mul(g.z[q], p);
        gens.push(h);
    }
    gens.push(PauliOp::single(s.ring, s.n, q, top, 0));
    Ok(StabilizerGroup { gens, ..s.clone() })
}

/// Pauli `P` (as local gates) with `P t P†` carrying the required doubled
/// phase inside `S`, for every target `(t, required)`.
pub fn pauli_frame_correction(
    s: &StabilizerGroup,
    targets: &[(PauliOp, u64)],
) -> Result<(PauliOp, Vec<ElementaryGate>)> {
    let ring = s.ring;
    let n = s.n;
    let two_d = 2 * ring.d();
    let mut rows = Vec::with_capacity(targets.len());
    let mut rhs = Vec::with_capacity(targets.len());
    for (t, req) in targets {
        let c = s.coefficients_of(t).ok_or(Error::NotInSpan)?;
        for (i, g) in s.gens.iter().enumerate() {
            if crate::pauli::commutation_phase(t, g)? != 0 {
                return Err(Error::NotInCommutant(format!("{t} against generator {i}")));
            }
        }
        let cur = s.group_element(&c)?.gamma2;
        let diff = (req + two_d - cur) % two_d;
        if !diff.is_multiple_of(2) {
            return Err(Error::InvalidPhase(format!("{t} cannot reach doubled phase {req}")));
        }
        let mut row: Vec<u64> = t.z.iter().map(|&z| ring.neg(z)).collect();
        row.extend_from_slice(&t.x);
        rows.push(row);
        rhs.push(diff / 2);
    }
    let sys = ModMatrix::from_rows(ring, 2 * n, &rows)?;
    let sol = solve(&sys, &ModVec { ring, entries: rhs })?
        .ok_or_else(|| Error::Synthesis("frame correction targets are inconsistent".into()))?;
    let e = sol.entries[..n].to_vec();
    let f = sol.entries[n..].to_vec();
    let mut gates = Vec::new();
    for q in 0..n {
        if f[q] != 0 {
            gates.push(ElementaryGate::PauliZ { q, e: f[q] });
        }
        if e[q] != 0 {
            gates.push(ElementaryGate::PauliX { q, e: e[q] });
        }
    }
    let p = PauliOp { ring, x: e, z: f, gamma2: 0 };
    Ok((p, gates))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapExtract {
    pub parties: Vec<String>,
    /// One qudit per party.
    pub qudits: Vec<usize>,
    pub n_prime: u32,
    /// Ancilla index per party; each ancilla has dimension `p^{n'}`.
    pub ancillas: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    LocalClifford(LocalClifford),
    VGate(VGate),
    Gate(ElementaryGate),
    SwapExtract(SwapExtract),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    /// Acting party; a swap lists its parties joined by `+` and is a product
    /// of one local swap per party.
    pub party: String,
    /// Qudit dimension at the level the operation acts on (the high digits of
    /// each physical qudit).
    pub dim: u64,
    pub op: Operation,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationLog {
    pub entries: Vec<LogEntry>,
}

impl OperationLog {
    pub fn push(&mut self, party: &str, dim: u64, op: Operation) {
        self.entries.push(LogEntry { party: party.to_string(), dim, op });
    }

    pub fn extend(&mut self, other: OperationLog) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spm::compute_spm;
    use crate::stabilizer::Partition;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring(d: u64) -> RingParams {
        RingParams::new(d).unwrap()
    }

    fn local_basis(ring: RingParams, m: usize, i: usize) -> PauliOp {
        PauliOp::from_symplectic(ring, &unit(ring, 2 * m, i))
    }

    /// Images of the local basis after conjugating through `gates` in order.
    fn images_through(ring: RingParams, m: usize, gates: &[ElementaryGate]) -> Vec<PauliOp> {
        (0..2 * m)
            .map(|i| {
                let mut op = local_basis(ring, m, i);
                for g in gates {
                    op = g.conjugate(&op).unwrap();
                }
                op
            })
            .collect()
    }

    fn random_clifford(ring: RingParams, m: usize, rng: &mut ChaCha8Rng) -> LocalClifford {
        crate::oracle::random_local_clifford(ring, "a", &(0..m).collect::<Vec<_>>(), rng)
    }

    #[test]
    fn fourier_images() {
        let r = ring(3);
        let f = ElementaryGate::Fourier { q: 0 };
        let z = PauliOp::single(r, 1, 0, 0, 1);
        let x = PauliOp::single(r, 1, 0, 1, 0);
        assert_eq!(f.conjugate(&x).unwrap(), z);
        assert_eq!(f.conjugate(&z).unwrap(), PauliOp::single(r, 1, 0, 2, 0));
    }

    #[test]
    fn phase_gate_images() {
        let r = ring(4);
        let x = PauliOp::single(r, 1, 0, 1, 0);
        let img = ElementaryGate::Phase { q: 0, k: 1 }.conjugate(&x).unwrap();
        assert_eq!((img.x[0], img.z[0], img.gamma2), (1, 1, 1));
        let r3 = ring(3);
        let x3 = PauliOp::single(r3, 1, 0, 1, 0);
        let img = ElementaryGate::Phase { q: 0, k: 1 }.conjugate(&x3).unwrap();
        assert_eq!((img.x[0], img.z[0], img.gamma2), (1, 1, 4));
        assert!(img.order_phase_ok());
    }

    #[test]
    fn fourier_clifford_compiles_to_fourier() {
        let r = ring(9);
        let f = ElementaryGate::Fourier { q: 0 }.to_clifford(r, "a").unwrap();
        let gates = f.compile_to_elementary().unwrap();
        assert_eq!(images_through(r, 1, &gates), (0..2).map(|i| f.image(i)).collect::<Vec<_>>());
        let id = LocalClifford::identity(r, "a", vec![0]);
        let gates = id.compile_to_elementary().unwrap();
        assert_eq!(images_through(r, 1, &gates), (0..2).map(|i| id.image(i)).collect::<Vec<_>>());
    }

    #[test]
    fn synth_map_to_z_examples() {
        let r = ring(4);
        let c = synth_map_to_z(r, "a", &[0], &[2, 0], 1).unwrap();
        assert_eq!(c.symplectic.mul_vec(&[2, 0]).unwrap(), vec![0, 2]);
        let r9 = ring(9);
        let u = [3, 0, 0, 3];
        let c = synth_map_to_z(r9, "a", &[0, 1], &u, 1).unwrap();
        assert_eq!(c.symplectic.mul_vec(&u).unwrap(), vec![0, 0, 3, 0]);
        assert!(c.is_symplectic());
        let c = synth_map_to_z(r9, "a", &[0], &[0, 1], 2).unwrap();
        assert_eq!(c.symplectic.mul_vec(&[0, 1]).unwrap(), vec![0, 1]);
        assert!(synth_map_to_z(r9, "a", &[0], &[3, 0], 2).is_err());
    }

    #[test]
    fn synth_map_to_x_fixing_z_examples() {
        let r3 = ring(3);
        let g = [1, 0, 0, 1];
        let c = synth_map_to_x_fixing_z(r3, "a", &[0, 1], &g, 1).unwrap();
        assert_eq!(c.symplectic.mul_vec(&g).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(c.symplectic.mul_vec(&[0, 0, 1, 0]).unwrap(), vec![0, 0, 1, 0]);
        let r9 = ring(9);
        let g = [1, 3];
        let c = synth_map_to_x_fixing_z(r9, "a", &[0], &g, 2).unwrap();
        assert_eq!(c.symplectic.mul_vec(&g).unwrap(), vec![1, 0]);
        let c = synth_map_to_x_fixing_z(r9, "a", &[0], &[4, 5], 1).unwrap();
        assert_eq!(c.symplectic.mul_vec(&[4, 5]).unwrap(), vec![1, 0]);
        assert_eq!(c.symplectic.mul_vec(&[0, 3]).unwrap(), vec![0, 3]);
        assert!(synth_map_to_x_fixing_z(r9, "a", &[0], &[2, 0], 1).is_err());
    }

    #[test]
    fn diagonalize_examples() {
        let r2 = ring(2);
        let c = diagonalize_local_group(r2, 2, &[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap();
        for v in [[1u64, 1, 0, 0], [0, 0, 1, 1]] {
            let w = c.mul_vec(&v).unwrap();
            assert_eq!(&w[..2], &[0, 0]);
        }
        let c = diagonalize_local_group(r2, 1, &[vec![1, 0]]).unwrap();
        assert_eq!(c.mul_vec(&[1, 0]).unwrap()[0], 0);
        assert!(diagonalize_local_group(ring(3), 1, &[vec![1, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn lift_examples() {
        let r2 = ring(2);
        let f = ModMatrix::from_i64(r2, &[vec![0, 1], vec![1, 0]]);
        let lifted = lift_symplectic(&f, ring(4)).unwrap();
        let c = LocalClifford::from_symplectic(ring(4), "a", vec![0], lifted.clone()).unwrap();
        assert!(c.is_symplectic());
        assert_eq!(lifted.reduce_into(r2), f);
        let id = lift_symplectic(&ModMatrix::identity(ring(3), 4), ring(27)).unwrap();
        assert_eq!(id, ModMatrix::identity(ring(27), 4));
    }

    fn ghz9() -> StabilizerGroup {
        let r = ring(9);
        let gens = vec![
            PauliOp::new(r, vec![1, 1, 1], vec![0, 0, 0], 0).unwrap(),
            PauliOp::new(r, vec![0, 0, 0], vec![1, 8, 0], 0).unwrap(),
            PauliOp::new(r, vec![0, 0, 0], vec![1, 0, 8], 0).unwrap(),
        ];
        StabilizerGroup::new(r, 3, gens, Partition::from_assignment(&["a", "b", "c"], &[0, 1, 2]).unwrap()).unwrap()
    }

    #[test]
    fn v_gate_on_x2z2() {
        let r = ring(4);
        let s = StabilizerGroup::new(
            r,
            1,
            vec![PauliOp::single(r, 1, 0, 2, 0), PauliOp::single(r, 1, 0, 0, 2)],
            Partition::from_assignment(&["a"], &[0]).unwrap(),
        )
        .unwrap();
        let t = apply_v_gate_to_group(&s, &VGate { party: "a".into(), qudit: 0, ring: r }).unwrap();
        assert_eq!(t.gens[0], PauliOp::single(r, 1, 0, 1, 0));
        assert_eq!(t.gens[1], PauliOp::single(r, 1, 0, 0, 0));
        assert!(t.drop_identities().validate().pure);
    }

    #[test]
    fn v_gate_precondition() {
        let s = ghz9();
        let v = VGate { party: "a".into(), qudit: 0, ring: ring(9) };
        assert!(matches!(apply_v_gate_to_group(&s, &v), Err(Error::Precondition(_))));
    }

    #[test]
    fn frame_correction_examples() {
        let r = ring(4);
        let s = StabilizerGroup::new(
            r,
            1,
            vec![PauliOp::single(r, 1, 0, 0, 2).with_phase(4)],
            Partition::from_assignment(&["a"], &[0]).unwrap(),
        )
        .unwrap();
        let target = PauliOp::single(r, 1, 0, 0, 2);
        let (p, gates) = pauli_frame_correction(&s, &[(target.clone(), 0)]).unwrap();
        assert_eq!(gates, vec![ElementaryGate::PauliX { q: 0, e: 1 }]);
        let t = apply_pauli_to_group(&s, &p).unwrap();
        assert_eq!(t.commutant_phase_lookup(&target).unwrap(), 0);
        let (_, gates) = pauli_frame_correction(&ghz9(), &[(ghz9().gens[0].clone(), 0)]).unwrap();
        assert!(gates.is_empty());
    }

    #[test]
    fn log_json_roundtrip() {
        let mut log = OperationLog::default();
        log.push("a", 9, Operation::Gate(ElementaryGate::Fourier { q: 0 }));
        log.push("a", 9, Operation::VGate(VGate { party: "a".into(), qudit: 0, ring: ring(9) }));
        log.push(
            "a+b",
            9,
            Operation::SwapExtract(SwapExtract {
                parties: vec!["a".into(), "b".into()],
                qudits: vec![0, 1],
                n_prime: 2,
                ancillas: vec![0, 1],
            }),
        );
        log.push("b", 9, Operation::LocalClifford(LocalClifford::identity(ring(9), "b", vec![1])));
        let text = serde_json::to_string(&log).unwrap();
        let back: OperationLog = serde_json::from_str(&text).unwrap();
        assert_eq!(back, log);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn compile_reproduces_images(d in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9]), m in 1usize..3, seed in any::<u64>()) {
            let r = ring(d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_clifford(r, m, &mut rng);
            prop_assert!(c.is_symplectic());
            let gates = c.compile_to_elementary().unwrap();
            let want: Vec<PauliOp> = (0..2 * m).map(|i| c.image(i)).collect();
            prop_assert_eq!(images_through(r, m, &gates), want);
        }

        #[test]
        fn synthesized_cliffords_are_symplectic(d in prop::sample::select(vec![4u64, 8, 9, 27]), seed in any::<u64>()) {
            let r = ring(d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(1..4);
            let u: Vec<u64> = (0..2 * m).map(|_| rng.gen_range(0..d)).collect();
            let (k, _) = split_order(r, &u).unwrap();
            if k > 0 {
                let c = synth_map_to_z(r, "a", &(0..m).collect::<Vec<_>>(), &u, k).unwrap();
                prop_assert!(c.is_symplectic());
                let (p, n) = r.pn().unwrap();
                let mut want = vec![0; 2 * m];
                want[m] = p.pow(n - k);
                prop_assert_eq!(c.symplectic.mul_vec(&u).unwrap(), want);
            }
        }

        #[test]
        fn lift_is_congruent_and_symplectic(d in prop::sample::select(vec![2u64, 3, 5]), e in 2u32..4, seed in any::<u64>()) {
            let rp = ring(d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(1..3);
            let c = random_clifford(rp, m, &mut rng);
            let big = ring(d.pow(e));
            let lifted = lift_symplectic(&c.symplectic, big).unwrap();
            prop_assert_eq!(lifted.reduce_into(rp), c.symplectic.clone());
            prop_assert!(LocalClifford::from_symplectic(big, "a", (0..m).collect(), lifted).is_ok());
        }

        #[test]
        fn clifford_preserves_spm(seed in any::<u64>(), d in prop::sample::select(vec![3u64, 4, 9])) {
            let params = crate::oracle::RandomGroupParams::new(ring(d), 3, 3);
            let s = crate::oracle::random_stabilizer_group(&params, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            let party = rng.gen_range(0..3);
            let qudits = s.partition.qudits(party).to_vec();
            prop_assume!(!qudits.is_empty());
            let mut c = random_clifford(ring(d), qudits.len(), &mut rng);
            c.qudits = qudits;
            c.party = s.partition.parties()[party].label.clone();
            let t = apply_clifford_to_group(&s, &c).unwrap();
            prop_assert!(t.validate().pure);
            prop_assert_eq!(compute_spm(&s), compute_spm(&t));
        }
    }
}
