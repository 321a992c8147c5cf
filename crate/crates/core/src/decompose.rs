//! The extraction loop: classify the subsystem phase matrices, then either
//! drop one digit of every qudit (Condition 1), or extract GHZ states
//! (Condition 2) or EPR pairs (Condition 3) into ancillas, until a `p`-level
//! product state remains.
//!
//! Counts are in `p`-level units. A party with `|α|` qudits of dimension
//! `p^n` holds `n|α|` digits; digits not handed to an ancilla end in `|0⟩_p`
//! and make up `N_α`.

use serde::{Deserialize, Serialize};

use crate::clifford::{
    apply_clifford_to_group, apply_pauli_to_group, apply_v_gate_to_group, diagonalizing_clifford,
    pauli_frame_correction, split_order, synth_map_to_x_fixing_z, synth_map_to_z, LocalClifford, Operation,
    OperationLog, SwapExtract, VGate,
};
use crate::error::{Error, Result};
use crate::linalg::{kernel, solve, ModMatrix, ModVec, RingParams};
use crate::oracle::{verify_log, VerificationReport, DEFAULT_DIM_CAP};
use crate::pauli::{commutation_phase, PauliOp};
use crate::spm::{classify_condition, compute_spm, project_mod_p, ConditionResult, SpmSet};
use crate::stabilizer::{Partition, Party, StabilizerGroup};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Defaults to `n (2N + 1)`.
    pub max_iterations: Option<usize>,
    /// Replay the log on the dense oracle when `D^N` fits `cap`.
    pub verify: bool,
    pub cap: u64,
    /// Recorded in the report; the engine itself is deterministic.
    pub seed: u64,
    /// Store each iteration's subsystem phase matrices in the trace.
    pub trace_spm: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_iterations: None, verify: true, cap: DEFAULT_DIM_CAP, seed: 0, trace_spm: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_ghz: u32,
    pub n_ab: u32,
    pub n_ac: u32,
    pub n_bc: u32,
    pub n_a: u32,
    pub n_b: u32,
    pub n_c: u32,
}

impl Counts {
    /// `(N_GHZ, N_ab, N_ac, N_bc)`.
    pub fn entangled(&self) -> [u32; 4] {
        [self.n_ghz, self.n_ab, self.n_ac, self.n_bc]
    }

    /// Expected `log_p` rank of each party's reduced state.
    pub fn cut_entropies(&self) -> [u32; 3] {
        [self.n_ghz + self.n_ab + self.n_ac, self.n_ghz + self.n_ab + self.n_bc, self.n_ghz + self.n_ac + self.n_bc]
    }

    fn add(&mut self, o: &Counts) {
        self.n_ghz += o.n_ghz;
        self.n_ab += o.n_ab;
        self.n_ac += o.n_ac;
        self.n_bc += o.n_bc;
        self.n_a += o.n_a;
        self.n_b += o.n_b;
        self.n_c += o.n_c;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Current level `p^n`.
    pub dim: u64,
    pub n: u32,
    pub num_gens: usize,
    /// Cut entropy of each party before the step, in units of `log p`.
    pub cut_entropies: Vec<u32>,
    pub condition: ConditionResult,
    /// Digits per party handed to `|0⟩_p` by this step (reductions only).
    pub unentangled: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spm: Option<SpmSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ancilla {
    pub party: String,
    pub dim: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub parties: Vec<String>,
    pub n_prime: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub d: u64,
    /// `None` for composite `D`; see `factors`.
    pub p: Option<u64>,
    pub parties: Vec<String>,
    #[serde(flatten)]
    pub counts: Counts,
    pub log: OperationLog,
    pub trace: Vec<TraceEntry>,
    pub ancillas: Vec<Ancilla>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verification: Option<VerificationReport>,
    /// `log_p` reduced ranks agree with the counts; `None` when not verified.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entropy_consistent: Option<bool>,
    /// Per prime-power factor for composite `D`; the counts above are then
    /// sums of the factor counts, each in its own `p`-level units.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub factors: Vec<DecompositionReport>,
}

impl DecompositionReport {
    /// Oracle replay passed (vacuously true when not verified).
    pub fn verified_ok(&self) -> bool {
        self.verification.as_ref().is_none_or(|v| v.passed)
            && self.entropy_consistent != Some(false)
            && self.factors.iter().all(|f| f.verified_ok())
    }
}

/// A group under local operations, with the log and a few tracked elements.
struct Work {
    s: StabilizerGroup,
    log: OperationLog,
    tracked: Vec<PauliOp>,
}

impl Work {
    fn new(s: StabilizerGroup) -> Self {
        Work { s, log: OperationLog::default(), tracked: Vec::new() }
    }

    fn dim(&self) -> u64 {
        self.s.ring.d()
    }

    fn clifford(&mut self, c: LocalClifford) -> Result<()> {
        let n2 = c.symplectic.rows;
        if c.symplectic == ModMatrix::identity(c.ring, n2) && c.phases.iter().all(|&g| g == 0) {
            return Ok(());
        }
        self.s = apply_clifford_to_group(&self.s, &c)?;
        self.tracked = self.tracked.iter().map(|t| c.conjugate(t)).collect::<Result<_>>()?;
        let dim = self.dim();
        self.log.push(&c.party.clone(), dim, Operation::LocalClifford(c));
        Ok(())
    }

    fn frame(&mut self, targets: &[(PauliOp, u64)]) -> Result<()> {
        let (p, gates) = pauli_frame_correction(&self.s, targets)?;
        if gates.is_empty() {
            return Ok(());
        }
        self.s = apply_pauli_to_group(&self.s, &p)?;
        let two_d = 2 * self.dim();
        for t in &mut self.tracked {
            t.gamma2 = (t.gamma2 + 2 * commutation_phase(&p, t)?) % two_d;
        }
        let dim = self.dim();
        for g in gates {
            let q = g.qudits()[0];
            let party = self.s.partition.party_of(q).expect("partition covers every qudit");
            let label = self.s.partition.parties()[party].label.clone();
            self.log.push(&label, dim, Operation::Gate(g));
        }
        Ok(())
    }

    fn v_gate(&mut self, party: &str, q: usize) -> Result<()> {
        let (p, _) = self.s.ring.expect_pn()?;
        let v = VGate { party: party.to_string(), qudit: q, ring: self.s.ring };
        self.s = apply_v_gate_to_group(&self.s, &v)?;
        for t in &mut self.tracked {
            if t.x[q] % p != 0 {
                return Err(Error::Synthesis("tracked element does not commute with the V precondition".into()));
            }
            t.x[q] /= p;
            t.z[q] = self.s.ring.mul(t.z[q], p);
        }
        let dim = self.dim();
        self.log.push(party, dim, Operation::VGate(v));
        Ok(())
    }

    /// Per party, a local Clifford making every generator `x ≡ 0 (mod p)`.
    fn diagonalize_parties(&mut self) -> Result<()> {
        let ring = self.s.ring;
        let (p, _) = ring.expect_pn()?;
        for a in 0..self.s.partition.len() {
            let qudits = self.s.partition.qudits(a).to_vec();
            if qudits.is_empty() {
                continue;
            }
            let label = self.s.partition.parties()[a].label.clone();
            let restrictions: Vec<Vec<u64>> = self.s.gens.iter().map(|g| g.restrict(&qudits).symplectic()).collect();
            let c = diagonalizing_clifford(ring, &label, &qudits, &restrictions)?;
            self.clifford(c)?;
        }
        if self.s.gens.iter().any(|g| g.x.iter().any(|&x| x % p != 0)) {
            return Err(Error::Synthesis("local diagonalization left an X component".into()));
        }
        Ok(())
    }
}

fn level_exponent(ring: RingParams) -> Result<(u64, u32)> {
    ring.expect_pn()
}

/// Generators `x' = x/p`, `z' = z mod p^{n-1}`, `γ' = γ/p` over `Z_{p^{n-1}}`.
/// Every generator must have `x ≡ 0 (mod p)`; `Z_q^{p^{n-1}}` must carry
/// phase zero for every `q`.
fn rebase(s: &StabilizerGroup) -> Result<StabilizerGroup> {
    let (p, n) = level_exponent(s.ring)?;
    let ring = RingParams::prime_power(p, n - 1)?;
    let d = ring.d();
    let mut gens = Vec::with_capacity(s.gens.len());
    for g in &s.gens {
        if g.gamma2 % p != 0 {
            return Err(Error::ResidualPhase(format!("generator {g} has a phase not divisible by p")));
        }
        let x = g.x.iter().map(|&x| x / p).collect();
        let z = g.z.iter().map(|&z| z % d).collect();
        let op = PauliOp::new(ring, x, z, (g.gamma2 / p) as i64)
            .map_err(|e| Error::ResidualPhase(format!("rebased generator {g}: {e}")))?;
        gens.push(op);
    }
    Ok(StabilizerGroup::new(ring, s.n, gens, s.partition.clone())?.drop_identities())
}

/// One level reduction. Returns the group over `Z_{p^{n-1}}` on the same
/// qudits and the operations, logged at level `p^n`.
pub fn reduce_level(s: &StabilizerGroup) -> Result<(StabilizerGroup, OperationLog)> {
    let (p, n) = level_exponent(s.ring)?;
    if n < 2 {
        return Err(Error::Precondition("level reduction needs n >= 2".into()));
    }
    if !project_mod_p(&compute_spm(s))?.is_trivial() {
        return Err(Error::Precondition("subsystem phase matrices do not vanish mod p".into()));
    }
    let mut w = Work::new(s.clone());
    w.diagonalize_parties()?;
    let top = p.pow(n - 1);
    let targets: Vec<(PauliOp, u64)> = (0..s.n).map(|q| (PauliOp::single(s.ring, s.n, q, 0, top), 0)).collect();
    w.frame(&targets)?;
    let out = rebase(&w.s)?;
    Ok((out, w.log))
}

/// Rotates a product state over `Z_p` to `|0...0⟩`.
pub fn finalize(s: &StabilizerGroup) -> Result<OperationLog> {
    let (_, n) = level_exponent(s.ring)?;
    if n != 1 {
        return Err(Error::Precondition("final rotation needs n = 1".into()));
    }
    if !project_mod_p(&compute_spm(s))?.is_trivial() {
        return Err(Error::Precondition("state is not a product across parties".into()));
    }
    let mut w = Work::new(s.clone());
    w.diagonalize_parties()?;
    let targets: Vec<(PauliOp, u64)> = (0..s.n).map(|q| (PauliOp::single(s.ring, s.n, q, 0, 1), 0)).collect();
    w.frame(&targets)?;
    Ok(w.log)
}

/// Extracts `n'` GHZ copies (Condition 2, all three parties) or `n` EPR
/// copies (Condition 3, the two listed parties) into one ancilla per party.
/// The residual group lives on the same qudits at the same level.
pub fn extract_entanglement(
    s: &StabilizerGroup,
    witness: &ConditionResult,
) -> Result<(StabilizerGroup, OperationLog, Extraction)> {
    let ring = s.ring;
    let (p, n) = level_exponent(ring)?;
    let (bset, v, n_prime): (Vec<usize>, Vec<u64>, u32) = match witness {
        ConditionResult::Condition1 => {
            return Err(Error::Precondition("Condition 1 has no entanglement to extract".into()));
        }
        ConditionResult::Condition2 { v, n_prime } => ((0..s.partition.len()).collect(), v.clone(), *n_prime),
        ConditionResult::Condition3 { parties, v } => (parties.to_vec(), v.clone(), n),
    };
    let k = s.num_gens();
    if v.len() != k || n_prime == 0 || n_prime > n {
        return Err(Error::Precondition("witness does not match the generator list".into()));
    }
    if crate::linalg::element_order(&ModVec::new(ring, v.clone())) != ring.d() {
        return Err(Error::Precondition("witness v must have order p^n".into()));
    }
    let spm = compute_spm(s);
    let scale = p.pow(n - n_prime);

    // v' ∈ ker(Σ_B M_β) with v'·v = 1.
    let mut msum = ModMatrix::zeros(ring, k, k);
    for &b in &bset {
        msum = msum.add(&spm.mats[b])?;
    }
    let ker = kernel(&msum);
    let t: Vec<u64> = (0..ker.rows).map(|i| crate::linalg::dot(ring, ker.row(i), &v)).collect();
    let sys = ModMatrix::from_rows(ring, ker.rows, &[t])?;
    let c = solve(&sys, &ModVec::new(ring, vec![1]))?
        .ok_or_else(|| Error::Precondition("no kernel vector pairs to 1 with the witness".into()))?;
    let mut vp = vec![0; k];
    for (i, &ci) in c.entries.iter().enumerate() {
        for (j, e) in vp.iter_mut().enumerate() {
            *e = ring.add(*e, ring.mul(ci, ker.get(i, j)));
        }
    }
    let target = ModVec::new(ring, v.iter().map(|&e| ring.mul(e, scale)).collect());
    let mut tracked = vec![s.group_element(&vp)?];
    for &b in &bset {
        let u = solve(&spm.mats[b], &target)?
            .ok_or_else(|| Error::Precondition(format!("p^(n-n') v is outside the span of party {b}")))?;
        tracked.push(s.group_element(&u.entries)?);
    }

    let mut w = Work::new(s.clone());
    w.tracked = tracked;
    let mut firsts = Vec::with_capacity(bset.len());
    let mut labels = Vec::with_capacity(bset.len());
    for (idx, &b) in bset.iter().enumerate() {
        let qudits = w.s.partition.qudits(b).to_vec();
        let label = w.s.partition.parties()[b].label.clone();
        if qudits.is_empty() {
            return Err(Error::Precondition(format!("party '{label}' is empty")));
        }
        let q = qudits[0];
        let h_local = w.tracked[1 + idx].restrict(&qudits).symplectic();
        let (mut kb, _) = split_order(ring, &h_local)?;
        if kb < n_prime {
            return Err(Error::Synthesis(format!("local part of h on '{label}' has order p^{kb} < p^{n_prime}")));
        }
        let c1 = synth_map_to_z(ring, &label, &qudits, &h_local, kb)?;
        w.clifford(c1)?;
        while kb > n_prime {
            let zt = PauliOp::single(ring, s.n, q, 0, p.pow(n - kb + n_prime));
            w.frame(&[(zt, 0)])?;
            w.v_gate(&label, q)?;
            kb -= 1;
        }
        let h_now = w.tracked[1 + idx].restrict(&qudits).symplectic();
        let mut want = vec![0; 2 * qudits.len()];
        want[qudits.len()] = scale % ring.d();
        if h_now != want {
            return Err(Error::Synthesis(format!("h on '{label}' is not Z^{scale} on its first qudit")));
        }
        let g_local = w.tracked[0].restrict(&qudits).symplectic();
        let c2 = synth_map_to_x_fixing_z(ring, &label, &qudits, &g_local, n_prime)?;
        w.clifford(c2)?;
        firsts.push(q);
        labels.push(label);
    }

    // X_B and Z^s Z^{-s} pairs to phase zero.
    let mut xb = PauliOp::identity(ring, s.n);
    for &q in &firsts {
        xb.x[q] = 1;
    }
    let mut targets = vec![(xb, 0)];
    for &q in &firsts[1..] {
        let mut pair = PauliOp::identity(ring, s.n);
        pair.z[firsts[0]] = scale;
        pair.z[q] = ring.neg(scale);
        targets.push((pair, 0));
    }
    w.frame(&targets)?;

    let dim = ring.d();
    let joined = labels.join("+");
    let ancillas = (0..firsts.len()).collect();
    w.log.push(
        &joined,
        dim,
        Operation::SwapExtract(SwapExtract { parties: labels.clone(), qudits: firsts.clone(), n_prime, ancillas }),
    );

    // Residual: elements commuting with every Z_{q_β}^{scale}, plus those.
    let rows: Vec<Vec<u64>> =
        firsts.iter().map(|&q| w.s.gens.iter().map(|g| ring.mul(g.x[q], scale)).collect()).collect();
    let a = ModMatrix::from_rows(ring, w.s.num_gens(), &rows)?;
    let sbar = kernel(&a);
    let mut gens = (0..sbar.rows).map(|i| w.s.group_element(sbar.row(i))).collect::<Result<Vec<_>>>()?;
    for &q in &firsts {
        gens.push(PauliOp::single(ring, s.n, q, 0, scale));
    }
    let residual = StabilizerGroup::new(ring, s.n, gens, s.partition.clone())?.canonicalize().drop_identities();
    residual
        .ensure_pure()
        .map_err(|e| Error::Synthesis(format!("residual group after extraction is not pure: {e}")))?;
    Ok((residual, w.log, Extraction { parties: labels, n_prime }))
}

fn pad_partition(s: &StabilizerGroup) -> Result<StabilizerGroup> {
    let m = s.partition.len();
    if m > 3 {
        return Err(Error::Precondition(format!("the engine needs at most 3 parties, got {m}")));
    }
    if m == 3 {
        return Ok(s.clone());
    }
    let mut parties = s.partition.parties().to_vec();
    let mut i = 0;
    while parties.len() < 3 {
        let label = format!("_{i}");
        if !parties.iter().any(|p| p.label == label) {
            parties.push(Party { label, qudits: vec![] });
        }
        i += 1;
    }
    let partition = Partition::new(parties, s.n)?;
    Ok(StabilizerGroup { partition, ..s.clone() })
}

fn cut_entropies(s: &StabilizerGroup) -> Result<Vec<u32>> {
    (0..s.partition.len()).map(|a| s.cut_entropy(a)).collect()
}

/// Full decomposition of a pure group with at most three parties.
pub fn run(s: &StabilizerGroup, config: &EngineConfig) -> Result<DecompositionReport> {
    s.ensure_pure()?;
    let input = pad_partition(s)?;
    if !input.ring.is_prime_power() {
        return run_composite(&input, config);
    }
    let (p, n0) = level_exponent(input.ring)?;
    let bound = config.max_iterations.unwrap_or(n0 as usize * (2 * input.n + 1));
    let mut cur = input.clone();
    let mut log = OperationLog::default();
    let mut trace = Vec::new();
    let mut ancillas = Vec::new();
    let mut counts = Counts::default();
    let mut used = [0u32; 3];
    let mut iteration = 0;
    loop {
        if iteration >= bound {
            return Err(Error::IterationBound { bound });
        }
        let (_, n) = level_exponent(cur.ring)?;
        let spm = compute_spm(&cur);
        let condition = classify_condition(&spm)?;
        let mut entry = TraceEntry {
            iteration,
            dim: cur.ring.d(),
            n,
            num_gens: cur.num_gens(),
            cut_entropies: cut_entropies(&cur)?,
            condition: condition.clone(),
            unentangled: vec![0; 3],
            spm: config.trace_spm.then(|| spm.clone()),
        };
        iteration += 1;
        match &condition {
            ConditionResult::Condition1 if n == 1 => {
                log.extend(finalize(&cur)?);
                entry.unentangled = (0..3).map(|a| cur.partition.qudits(a).len() as u32).collect();
                trace.push(entry);
                break;
            }
            ConditionResult::Condition1 => {
                let (next, frag) = reduce_level(&cur)?;
                log.extend(frag);
                entry.unentangled = (0..3).map(|a| cur.partition.qudits(a).len() as u32).collect();
                cur = next;
            }
            witness => {
                let (next, frag, ex) = extract_entanglement(&cur, witness)?;
                let base = ancillas.len();
                for mut e in frag.entries {
                    if let Operation::SwapExtract(sw) = &mut e.op {
                        sw.ancillas = (base..base + sw.parties.len()).collect();
                    }
                    log.entries.push(e);
                }
                let idx: Vec<usize> = ex.parties.iter().map(|l| cur.partition.index_of(l)).collect::<Result<_>>()?;
                for (&i, label) in idx.iter().zip(&ex.parties) {
                    used[i] += ex.n_prime;
                    ancillas.push(Ancilla { party: label.clone(), dim: p.pow(ex.n_prime) });
                }
                match idx.as_slice() {
                    [_, _, _] => counts.n_ghz += ex.n_prime,
                    [0, 1] => counts.n_ab += ex.n_prime,
                    [0, 2] => counts.n_ac += ex.n_prime,
                    [1, 2] => counts.n_bc += ex.n_prime,
                    other => return Err(Error::Synthesis(format!("unexpected party set {other:?}"))),
                }
                cur = next;
            }
        }
        trace.push(entry);
    }
    let digits = |a: usize| n0 * input.partition.qudits(a).len() as u32 - used[a];
    counts.n_a = digits(0);
    counts.n_b = digits(1);
    counts.n_c = digits(2);

    let mut report = DecompositionReport {
        d: input.ring.d(),
        p: Some(p),
        parties: input.partition.labels().iter().map(|s| s.to_string()).collect(),
        counts,
        log,
        trace,
        ancillas,
        seed: config.seed,
        verification: None,
        entropy_consistent: None,
        factors: Vec::new(),
    };
    if config.verify && fits(input.ring.d(), input.n, config.cap) {
        let v = verify_log(&input, &report.log, config.cap)?;
        let expected = report.counts.cut_entropies();
        report.entropy_consistent =
            Some(v.reduced_ranks.iter().zip(expected).all(|(&r, e)| r as u128 == (p as u128).pow(e)));
        report.verification = Some(v);
    }
    Ok(report)
}

fn fits(d: u64, n: usize, cap: u64) -> bool {
    (d as u128).checked_pow(n as u32).is_some_and(|t| t <= cap as u128)
}

fn run_composite(s: &StabilizerGroup, config: &EngineConfig) -> Result<DecompositionReport> {
    let mut counts = Counts::default();
    let mut factors = Vec::new();
    for f in s.crt_split()? {
        let r = run(&f, config)?;
        counts.add(&r.counts);
        factors.push(r);
    }
    Ok(DecompositionReport {
        d: s.ring.d(),
        p: None,
        parties: s.partition.labels().iter().map(|l| l.to_string()).collect(),
        counts,
        log: OperationLog::default(),
        trace: Vec::new(),
        ancillas: Vec::new(),
        seed: config.seed,
        verification: None,
        entropy_consistent: None,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{random_stabilizer_group, replay_log, state_from_group, RandomGroupParams};
    use proptest::prelude::*;

    fn ring(d: u64) -> RingParams {
        RingParams::new(d).unwrap()
    }

    fn x2z2() -> StabilizerGroup {
        let r = ring(4);
        StabilizerGroup::new(
            r,
            1,
            vec![PauliOp::single(r, 1, 0, 2, 0), PauliOp::single(r, 1, 0, 0, 2)],
            Partition::from_assignment(&["a"], &[0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn reduce_x2z2() {
        let (t, log) = reduce_level(&x2z2()).unwrap();
        assert_eq!(t.ring.d(), 2);
        assert_eq!(t.gens, vec![PauliOp::single(ring(2), 1, 0, 1, 0)]);
        let r = replay_log(&x2z2(), &log, DEFAULT_DIM_CAP).unwrap();
        // Low digit |0⟩, high digit |+⟩: amplitudes on |0⟩ and |2⟩.
        let want = state_from_group(&t, DEFAULT_DIM_CAP).unwrap();
        let got = [r.final_state.amps[0], r.final_state.amps[2]];
        let ov = got[0].conj() * want.amps[0] + got[1].conj() * want.amps[1];
        assert!((ov.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduce_all_z() {
        let r = ring(9);
        let s = fixtures::zero_product(r, &["a", "b"], &[0, 1]).unwrap();
        let (t, log) = reduce_level(&s).unwrap();
        assert!(log.is_empty());
        assert_eq!(t.ring.d(), 3);
        assert_eq!(t.gens, vec![PauliOp::single(ring(3), 2, 0, 0, 1), PauliOp::single(ring(3), 2, 1, 0, 1)]);
    }

    #[test]
    fn reduce_rejects_prime_level() {
        let s = fixtures::zero_product(ring(3), &["a"], &[0]).unwrap();
        assert!(matches!(reduce_level(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn ghz9_extracts_two_copies() {
        let s = fixtures::ghz(ring(9), 3).unwrap();
        let w = classify_condition(&compute_spm(&s)).unwrap();
        let (t, log, ex) = extract_entanglement(&s, &w).unwrap();
        assert_eq!(ex.n_prime, 2);
        assert_eq!(ex.parties.len(), 3);
        assert_eq!(classify_condition(&compute_spm(&t)).unwrap(), ConditionResult::Condition1);
        let r = replay_log(&s, &log, DEFAULT_DIM_CAP).unwrap();
        let want = state_from_group(&t, DEFAULT_DIM_CAP).unwrap();
        assert!((r.final_state.inner(&want).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn epr_extraction() {
        for d in [2, 3, 4, 5, 9] {
            let s = fixtures::epr(ring(d)).unwrap();
            let rep = run(&s, &EngineConfig::default()).unwrap();
            let (_, n) = ring(d).pn().unwrap();
            assert_eq!(rep.counts.entangled(), [0, n, 0, 0], "d = {d}");
            assert_eq!((rep.counts.n_a, rep.counts.n_b, rep.counts.n_c), (0, 0, 0));
            assert!(rep.verified_ok(), "d = {d}: {:?}", rep.verification);
        }
    }

    #[test]
    fn ghz9_run() {
        let rep = run(&fixtures::ghz(ring(9), 3).unwrap(), &EngineConfig::default()).unwrap();
        assert_eq!(rep.counts, Counts { n_ghz: 2, ..Counts::default() });
        assert!(rep.verified_ok());
        assert_eq!(rep.ancillas.len(), 3);
    }

    #[test]
    fn product_run() {
        let s = fixtures::zero_product(ring(3), &["a", "b", "c"], &[0, 1, 2]).unwrap();
        let rep = run(&s, &EngineConfig::default()).unwrap();
        assert_eq!(rep.counts, Counts { n_a: 1, n_b: 1, n_c: 1, ..Counts::default() });
        assert!(rep.verified_ok());
    }

    #[test]
    fn x2z2_run() {
        let rep = run(&x2z2(), &EngineConfig::default()).unwrap();
        assert_eq!(rep.counts, Counts { n_a: 2, ..Counts::default() });
        assert!(rep.verified_ok());
        assert_eq!(rep.trace.len(), 2);
    }

    #[test]
    fn composite_run() {
        let s = fixtures::epr(ring(6)).unwrap();
        let rep = run(&s, &EngineConfig::default()).unwrap();
        assert_eq!(rep.factors.len(), 2);
        assert_eq!(rep.factors.iter().map(|f| f.p.unwrap()).collect::<Vec<_>>(), vec![2, 3]);
        assert!(rep.factors.iter().all(|f| f.counts.n_ab == 1));
        assert!(rep.verified_ok());
    }

    #[test]
    fn too_many_parties() {
        let s = fixtures::ghz(ring(3), 4).unwrap();
        assert!(matches!(run(&s, &EngineConfig::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn report_json_roundtrip() {
        let rep = run(&fixtures::ghz(ring(3), 3).unwrap(), &EngineConfig::default()).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"n_ghz\":1"));
        let back: DecompositionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.counts, rep.counts);
        assert_eq!(back.log, rep.log);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn random_runs_verify(d in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9]), nq in 1usize..4, seed in any::<u64>()) {
            let s = random_stabilizer_group(&RandomGroupParams::new(ring(d), nq, 3), seed);
            let rep = run(&s, &EngineConfig::default()).unwrap();
            prop_assert!(rep.verified_ok(), "report {:?}", rep.verification);
            prop_assert_eq!(rep.entropy_consistent, Some(true));
            for w in rep.trace.windows(2) {
                let a = (w[0].n, w[0].cut_entropies.iter().sum::<u32>());
                let b = (w[1].n, w[1].cut_entropies.iter().sum::<u32>());
                prop_assert!(b < a, "no progress: {:?} -> {:?}", a, b);
            }
        }
    }
}
