//! Subsystem phase matrices and the three-way condition classifier.
//!
//! `M_α[i][j] = g_i^T Ω_α g_j` over the generator list. Spans are column
//! spans; every `M_α` is antisymmetric, so row and column spans agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    element_order, howell_form, inverse, solve, span_intersection, span_membership, ModMatrix, ModVec, RingParams,
};
use crate::pauli::restricted_commutation_phase;
use crate::stabilizer::StabilizerGroup;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpmSet {
    pub ring: RingParams,
    pub labels: Vec<String>,
    pub mats: Vec<ModMatrix>,
}

/// Entries of an [`SpmSet`] reduced mod `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedSpmSet {
    pub ring: RingParams,
    pub labels: Vec<String>,
    pub mats: Vec<ModMatrix>,
}

impl ProjectedSpmSet {
    pub fn is_trivial(&self) -> bool {
        self.mats.iter().all(ModMatrix::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ConditionResult {
    /// Every `M'_α` vanishes.
    Condition1,
    /// `p^{n-n'} v` lies in every span; `v` has order `p^n`.
    Condition2 { v: Vec<u64>, n_prime: u32 },
    /// `v` lies in the spans of both listed parties, `p^{n-1} v` outside the third.
    Condition3 { parties: [usize; 2], v: Vec<u64> },
}

impl SpmSet {
    pub fn num_gens(&self) -> usize {
        self.mats.first().map_or(0, |m| m.rows)
    }

    /// Antisymmetry, zero diagonal and `Σ_α M_α = 0`.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.num_gens();
        let mut total = ModMatrix::zeros(self.ring, k, k);
        for (m, label) in self.mats.iter().zip(&self.labels) {
            if !m.add(&m.transpose())?.is_zero() || (0..k).any(|i| m.get(i, i) != 0) {
                return Err(Error::InvalidGroup(format!("M_{label} is not antisymmetric")));
            }
            total = total.add(m)?;
        }
        if !total.is_zero() {
            return Err(Error::InvalidGroup("subsystem phase matrices do not sum to zero".into()));
        }
        Ok(())
    }
}

pub fn compute_spm(s: &StabilizerGroup) -> SpmSet {
    let k = s.num_gens();
    let mut mats = Vec::with_capacity(s.partition.len());
    for party in s.partition.parties() {
        let mut m = ModMatrix::zeros(s.ring, k, k);
        for i in 0..k {
            for j in i + 1..k {
                let c = restricted_commutation_phase(&s.gens[i], &s.gens[j], &party.qudits)
                    .expect("generators share the group's ring and width");
                m.set(i, j, c);
                m.set(j, i, s.ring.neg(c));
            }
        }
        mats.push(m);
    }
    SpmSet { ring: s.ring, labels: s.partition.labels().iter().map(|l| l.to_string()).collect(), mats }
}

pub fn project_mod_p(spm: &SpmSet) -> Result<ProjectedSpmSet> {
    let p = spm.ring.expect_pn()?.0;
    let ring = RingParams::new(p)?;
    Ok(ProjectedSpmSet {
        ring,
        labels: spm.labels.clone(),
        mats: spm.mats.iter().map(|m| m.reduce_into(ring)).collect(),
    })
}

/// `M_α ↦ L M_α L^T`.
pub fn transform_basis(spm: &SpmSet, l: &ModMatrix) -> Result<SpmSet> {
    if inverse(l).is_none() {
        return Err(Error::NotInvertible(spm.ring.d()));
    }
    let lt = l.transpose();
    let mats = spm.mats.iter().map(|m| l.mul(m)?.mul(&lt)).collect::<Result<Vec<_>>>()?;
    Ok(SpmSet { mats, ..spm.clone() })
}

/// Invertible `L` with `L v = e_0`; `v` needs a unit entry.
pub(crate) fn map_to_first_unit(ring: RingParams, v: &[u64]) -> Result<ModMatrix> {
    let k = v.len();
    let i = v
        .iter()
        .position(|&e| ring.is_unit(e))
        .ok_or_else(|| Error::Precondition("vector has no unit entry".into()))?;
    // B has columns v, then e_j for j != i; B e_0 = v.
    let mut b = ModMatrix::zeros(ring, k, k);
    for (r, &e) in v.iter().enumerate() {
        b.set(r, 0, e);
    }
    for (col, j) in (0..k).filter(|&j| j != i).enumerate() {
        b.set(j, col + 1, 1);
    }
    inverse(&b).ok_or(Error::NotInvertible(ring.d()))
}

fn scalar(ring: RingParams, k: usize, c: u64) -> ModMatrix {
    let mut m = ModMatrix::zeros(ring, k, k);
    for i in 0..k {
        m.set(i, i, c);
    }
    m
}

fn columns_contain(m: &ModMatrix, v: &[u64]) -> bool {
    span_membership(&ModVec { ring: m.ring, entries: v.to_vec() }, m).expect("matching lengths")
}

/// Classifies a tripartite set. Condition 1 excludes the others (all spans
/// then lie in `p Z^k`); Condition 2 is tested before Condition 3.
pub fn classify_condition(spm: &SpmSet) -> Result<ConditionResult> {
    if spm.mats.len() != 3 {
        return Err(Error::Precondition(format!("classification needs 3 parties, got {}", spm.mats.len())));
    }
    let ring = spm.ring;
    let (p, n) = ring.expect_pn()?;
    let k = spm.num_gens();
    if project_mod_p(spm)?.is_trivial() {
        return Ok(ConditionResult::Condition1);
    }

    let mut meet = spm.mats[0].transpose();
    for m in &spm.mats[1..] {
        meet = span_intersection(&meet, &m.transpose())?;
    }
    let basis = howell_form(&meet).basis;
    let mut best: Option<(u64, Vec<u64>)> = None;
    for r in 0..basis.rows {
        let row = basis.row_vec(r);
        let ord = element_order(&row);
        if ord > 1 && best.as_ref().is_none_or(|(o, _)| ord > *o) {
            best = Some((ord, row.entries));
        }
    }
    if let Some((ord, vbar)) = best {
        let n_prime = (1..=n).find(|&e| p.pow(e) == ord).expect("orders are powers of p");
        let lift = scalar(ring, k, p.pow(n - n_prime));
        let v = solve(&lift, &ModVec { ring, entries: vbar })?
            .ok_or_else(|| Error::Precondition("intersection witness has no lift".into()))?;
        return Ok(ConditionResult::Condition2 { v: v.entries, n_prime });
    }

    // L-construction.
    let ring_p = RingParams::new(p)?;
    let a = (0..3).find(|&a| !spm.mats[a].reduce_into(ring_p).is_zero()).expect("some projection is nonzero");
    let col = (0..k).find(|&j| spm.mats[a].col(j).iter().any(|&e| e % p != 0)).expect("nonzero column mod p");
    let v = spm.mats[a].col(col);
    let top: Vec<u64> = v.iter().map(|&e| ring.mul(e, p.pow(n - 1))).collect();
    let c = (0..3).filter(|&c| c != a).find(|&c| !columns_contain(&spm.mats[c], &top)).ok_or_else(|| {
        Error::Precondition("no party excludes the witness; intersection should be nontrivial".into())
    })?;
    let b = 3 - a - c;

    let l1 = map_to_first_unit(ring, &v)?;
    let conj = |l: &ModMatrix, m: &ModMatrix| -> Result<ModMatrix> { l.mul(m)?.mul(&l.transpose()) };

    let mc = conj(&l1, &spm.mats[c])?;
    let mut l2 = ModMatrix::identity(ring, k);
    if k > 1 {
        let r: Vec<u64> = (1..k).map(|j| mc.get(0, j)).collect();
        let tilde_rows: Vec<Vec<u64>> = (1..k).map(|i| (1..k).map(|j| mc.get(i, j)).collect()).collect();
        let tilde = ModMatrix::from_rows(ring, k - 1, &tilde_rows)?;
        // row 0 of L2 M L2^T is r + M̃^T λ; clear it.
        let neg_r: Vec<u64> = r.iter().map(|&e| ring.neg(e)).collect();
        let lambda = solve(&tilde.transpose(), &ModVec { ring, entries: neg_r })?
            .ok_or_else(|| Error::Synthesis("cannot clear the excluded party's first row".into()))?;
        for (j, &l) in lambda.entries.iter().enumerate() {
            l2.set(0, j + 1, l);
        }
    }
    let l21 = l2.mul(&l1)?;
    let ma = conj(&l21, &spm.mats[a])?;
    let ra: Vec<u64> = (1..k).map(|j| ma.get(0, j)).collect();
    let lp = map_to_first_unit(ring, &ra)
        .map_err(|_| Error::Synthesis("first row of the witness party has no unit entry".into()))?;
    let mut l3 = ModMatrix::identity(ring, k);
    for i in 1..k {
        for j in 1..k {
            l3.set(i, j, lp.get(i - 1, j - 1));
        }
    }
    let l = l3.mul(&l21)?;
    let linv = inverse(&l).ok_or(Error::NotInvertible(ring.d()))?;
    let vprime = linv.col(1);
    let mut parties = [a, b];
    parties.sort_unstable();
    Ok(ConditionResult::Condition3 { parties, v: vprime })
}
