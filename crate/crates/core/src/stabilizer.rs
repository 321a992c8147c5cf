//! Stabilizer groups with redundant generating sets over `Z_D`.
//!
//! Group elements are addressed by coefficient vectors `c` over the generator
//! list: `F(c) = g_0^{c_0} g_1^{c_1} ...` in that order. `f` is the inverse
//! map on exponent vectors, computed through the Howell form of the stacked
//! `(x | z)` generator matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{howell_form, inverse, kernel, HowellForm, ModMatrix, RingParams};
use crate::pauli::{commutation_phase, PauliOp};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Party {
    pub label: String,
    pub qudits: Vec<usize>,
}

/// Disjoint parties covering qudits `0..N`. Empty parties are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    parties: Vec<Party>,
}

impl Partition {
    pub fn new(parties: Vec<Party>, n: usize) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidGroup("a partition needs at least one party".into()));
        }
        let mut seen = vec![false; n];
        for (i, p) in parties.iter().enumerate() {
            if parties[..i].iter().any(|o| o.label == p.label) {
                return Err(Error::InvalidGroup(format!("duplicate party label '{}'", p.label)));
            }
            for &q in &p.qudits {
                if q >= n {
                    return Err(Error::DimensionMismatch(format!(
                        "party '{}' names qudit {q}, but there are {n}",
                        p.label
                    )));
                }
                if seen[q] {
                    return Err(Error::InvalidGroup(format!("qudit {q} is in two parties")));
                }
                seen[q] = true;
            }
        }
        if let Some(q) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidGroup(format!("qudit {q} belongs to no party")));
        }
        Ok(Partition { parties })
    }

    /// `assignment[q]` is the index into `labels` of qudit `q`'s party.
    pub fn from_assignment(labels: &[&str], assignment: &[usize]) -> Result<Self> {
        let parties = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Party {
                label: l.to_string(),
                qudits: assignment.iter().enumerate().filter(|(_, &a)| a == i).map(|(q, _)| q).collect(),
            })
            .collect();
        Self::new(parties, assignment.len())
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.parties.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.parties.iter().position(|p| p.label == label).ok_or_else(|| Error::UnknownParty(label.to_string()))
    }

    pub fn qudits(&self, party: usize) -> &[usize] {
        &self.parties[party].qudits
    }

    pub fn party_of(&self, q: usize) -> Option<usize> {
        self.parties.iter().position(|p| p.qudits.contains(&q))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerGroup {
    pub ring: RingParams,
    pub n: usize,
    pub gens: Vec<PauliOp>,
    pub partition: Partition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `(i, j, c)` with `commutation_phase(g_i, g_j) = c != 0`.
    pub commutation_failures: Vec<(usize, usize, u64)>,
    /// Generators with `g^D != I`.
    pub order_failures: Vec<usize>,
    /// Relations `c` with `F(c) = ω^γ I`, `γ != 0`.
    pub identity_failures: Vec<Vec<u64>>,
    /// `|S|`, absent when it overflows `u128`.
    pub order: Option<u128>,
    pub pure: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.commutation_failures.is_empty() && self.order_failures.is_empty() && self.identity_failures.is_empty()
    }

    pub fn describe(&self) -> String {
        let mut out = Vec::new();
        for (i, j, c) in &self.commutation_failures {
            out.push(format!("generators {i} and {j} do not commute (phase {c})"));
        }
        for i in &self.order_failures {
            out.push(format!("generator {i} raised to the D-th power is not the identity"));
        }
        for c in &self.identity_failures {
            out.push(format!("relation {c:?} yields a nontrivial multiple of the identity"));
        }
        if self.is_valid() && !self.pure {
            out.push(match self.order {
                Some(o) => format!("group order {o} does not match a pure state"),
                None => "group order does not match a pure state".to_string(),
            });
        }
        out.join("; ")
    }
}

impl StabilizerGroup {
    pub fn new(ring: RingParams, n: usize, gens: Vec<PauliOp>, partition: Partition) -> Result<Self> {
        for (i, g) in gens.iter().enumerate() {
            if g.ring != ring {
                return Err(Error::RingMismatch(ring.d(), g.d()));
            }
            if g.num_qudits() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator {i} acts on {} qudits, expected {n}",
                    g.num_qudits()
                )));
            }
        }
        let covered: usize = partition.parties().iter().map(|p| p.qudits.len()).sum();
        if covered != n {
            return Err(Error::DimensionMismatch(format!("partition covers {covered} of {n} qudits")));
        }
        Ok(StabilizerGroup { ring, n, gens, partition })
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    /// `N_gen x 2N` matrix of stacked `(x | z)` rows.
    pub fn matrix(&self) -> ModMatrix {
        let rows: Vec<Vec<u64>> = self.gens.iter().map(PauliOp::symplectic).collect();
        ModMatrix::from_rows(self.ring, 2 * self.n, &rows).expect("generator widths are checked at construction")
    }

    pub fn howell(&self) -> HowellForm {
        howell_form(&self.matrix())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut commutation_failures = Vec::new();
        for i in 0..self.gens.len() {
            for j in i + 1..self.gens.len() {
                let c = commutation_phase(&self.gens[i], &self.gens[j]).expect("compatible generators");
                if c != 0 {
                    commutation_failures.push((i, j, c));
                }
            }
        }
        let order_failures: Vec<usize> =
            self.gens.iter().enumerate().filter(|(_, g)| !g.order_phase_ok()).map(|(i, _)| i).collect();

        let m = self.matrix();
        let mut identity_failures = Vec::new();
        if commutation_failures.is_empty() && order_failures.is_empty() {
            let k = kernel(&m.transpose());
            for r in 0..k.rows {
                let c = k.row(r).to_vec();
                let f = self.group_element(&c).expect("kernel rows have generator length");
                if f.gamma2 != 0 {
                    identity_failures.push(c);
                }
            }
        }

        let h = howell_form(&m);
        let d = self.ring.d();
        let sizes: Vec<u64> = h.pivots.iter().map(|&(_, piv)| d / piv).collect();
        let order = sizes.iter().try_fold(1u128, |acc, &s| acc.checked_mul(s as u128));
        let full = self.ring.factors().iter().all(|&(p, e)| {
            let got: u64 = sizes.iter().map(|&s| p_adic(s, p) as u64).sum();
            got == e as u64 * self.n as u64
        });
        let mut report =
            ValidationReport { commutation_failures, order_failures, identity_failures, order, pure: false };
        report.pure = report.is_valid() && full;
        report
    }

    /// Errors unless the group is a valid pure stabilizer group.
    pub fn ensure_pure(&self) -> Result<()> {
        let report = self.validate();
        if report.pure {
            Ok(())
        } else {
            Err(Error::InvalidGroup(report.describe()))
        }
    }

    /// `F(c)`.
    pub fn group_element(&self, c: &[u64]) -> Result<PauliOp> {
        if c.len() != self.gens.len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector of length {}, expected {}",
                c.len(),
                self.gens.len()
            )));
        }
        let mut acc = PauliOp::identity(self.ring, self.n);
        for (g, &k) in self.gens.iter().zip(c) {
            let k = self.ring.reduce(k);
            if k != 0 {
                acc = acc.multiply(&g.pow(k))?;
            }
        }
        Ok(acc)
    }

    /// `f(g)`: coefficients reproducing `g`'s exponents, ignoring its phase.
    pub fn coefficients_of(&self, g: &PauliOp) -> Option<Vec<u64>> {
        if g.num_qudits() != self.n || g.ring != self.ring {
            return None;
        }
        self.howell().express(&g.symplectic())
    }

    /// Doubled phase `φ` with `ω^{φ/2} g ∈ S`.
    pub fn commutant_phase_lookup(&self, g: &PauliOp) -> Result<u64> {
        for (i, s) in self.gens.iter().enumerate() {
            let c = commutation_phase(g, s)?;
            if c != 0 {
                return Err(Error::NotInCommutant(format!("{g} against generator {i} (phase {c})")));
            }
        }
        let c = self.coefficients_of(g).ok_or(Error::NotInSpan)?;
        let f = self.group_element(&c)?;
        let two_d = 2 * self.ring.d();
        Ok((f.gamma2 + two_d - g.gamma2) % two_d)
    }

    /// Generators `F(row_i(L))` for invertible `L`.
    pub fn change_generators(&self, l: &ModMatrix) -> Result<StabilizerGroup> {
        if l.rows != self.gens.len() || l.cols != self.gens.len() {
            return Err(Error::DimensionMismatch(format!(
                "basis change of size {}x{} for {} generators",
                l.rows,
                l.cols,
                self.gens.len()
            )));
        }
        if inverse(l).is_none() {
            return Err(Error::NotInvertible(self.ring.d()));
        }
        self.with_coefficient_rows(l)
    }

    /// Generators `F(row_i(rows))`, without an invertibility check.
    pub(crate) fn with_coefficient_rows(&self, rows: &ModMatrix) -> Result<StabilizerGroup> {
        let gens = (0..rows.rows).map(|i| self.group_element(rows.row(i))).collect::<Result<Vec<_>>>()?;
        Ok(StabilizerGroup { gens, ..self.clone() })
    }

    /// Replaces the generators by the Howell basis of the group, with phases
    /// inherited through `F`.
    pub fn canonicalize(&self) -> StabilizerGroup {
        let h = self.howell();
        self.with_coefficient_rows(&h.transform).expect("transform has generator width")
    }

    /// Drops generators with trivial exponents (they carry phase zero in a
    /// valid group).
    pub fn drop_identities(&self) -> StabilizerGroup {
        let gens = self.gens.iter().filter(|g| !g.is_identity_up_to_phase()).cloned().collect();
        StabilizerGroup { gens, ..self.clone() }
    }

    /// Entanglement entropy of `party` against the rest, in units of `log p`.
    /// Requires a pure group over `Z_{p^n}`.
    pub fn cut_entropy(&self, party: usize) -> Result<u32> {
        let (p, n) = self.ring.expect_pn()?;
        let inside = self.partition.qudits(party);
        let outside: Vec<usize> = (0..self.n).filter(|q| !inside.contains(q)).collect();
        let m = self.matrix();
        let cols: Vec<usize> = outside.iter().flat_map(|&q| [q, self.n + q]).collect();
        let rows: Vec<Vec<u64>> = (0..m.rows).map(|i| cols.iter().map(|&c| m.get(i, c)).collect()).collect();
        let outer = ModMatrix::from_rows(self.ring, cols.len(), &rows)?;
        let k = kernel(&outer.transpose());
        let local = k.mul(&m)?;
        let h = howell_form(&local);
        let log_local: u32 = h.pivots.iter().map(|&(_, piv)| p_adic(self.ring.d() / piv, p)).sum();
        Ok(n * inside.len() as u32 - log_local)
    }

    /// Splits a group over composite `D` into one group per prime-power
    /// factor, through `Z_D ≅ Π Z_{q_i}` with qudit index `j ↦ j mod q_i`.
    pub fn crt_split(&self) -> Result<Vec<StabilizerGroup>> {
        let factors = self.ring.factors();
        if factors.len() < 2 {
            return Err(Error::Precondition(format!("D = {} is already a prime power", self.ring.d())));
        }
        let d = self.ring.d();
        let mut out = Vec::with_capacity(factors.len());
        for &(p, e) in &factors {
            let q = p.pow(e);
            let sub = RingParams::new(q)?;
            let rest = d / q;
            // m ≡ 1 (mod q), m ≡ 0 (mod D/q)
            let m = rest * sub.inv(rest % q).expect("coprime factors") % d;
            let c = sub.inv(rest % q).expect("coprime factors");
            let mut gens = Vec::with_capacity(self.gens.len());
            for g in &self.gens {
                let h = g.pow(m);
                let scaled = h.gamma2 * q;
                if scaled % d != 0 {
                    return Err(Error::InvalidPhase(format!("{g} has no phase image modulo {q}")));
                }
                let x = h.x.iter().map(|&a| a % q).collect();
                let z = h.z.iter().map(|&b| sub.mul(b % q, c)).collect();
                gens.push(PauliOp::new(sub, x, z, (scaled / d) as i64)?);
            }
            let group = StabilizerGroup::new(sub, self.n, gens, self.partition.clone())?;
            out.push(group.drop_identities());
        }
        Ok(out)
    }
}

/// Exponent of `p` in `s`.
fn p_adic(mut s: u64, p: u64) -> u32 {
    let mut v = 0;
    while s > 1 && s.is_multiple_of(p) {
        s /= p;
        v += 1;
    }
    v
}
