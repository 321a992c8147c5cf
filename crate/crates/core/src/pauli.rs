//! Generalised Pauli operators `ω^γ Π_i X_i^{x_i} Z_i^{z_i}` over `Z_D`.
//!
//! Convention, used everywhere downstream: `σ_{x,z} = X^x Z^z` with `X` on the
//! left, and `commutation_phase(a, b) = c` means `σ_a σ_b = ω^c σ_b σ_a`.
//! Phases are stored doubled (`gamma2 = 2γ mod 2D`) so that half-integer
//! phases for even `D` stay integral.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, ModMatrix, RingParams};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOp {
    pub ring: RingParams,
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    /// `2γ mod 2D`.
    pub gamma2: u64,
}

impl PauliOp {
    /// Validates the phase parity (`gamma2` even for odd `D`) and reduces.
    pub fn new(ring: RingParams, x: Vec<u64>, z: Vec<u64>, gamma2: i64) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch("x and z exponent lengths differ".into()));
        }
        let two_d = 2 * ring.d() as i64;
        let gamma2 = gamma2.rem_euclid(two_d) as u64;
        if ring.d() % 2 == 1 && gamma2 % 2 == 1 {
            return Err(Error::InvalidPhase(format!(
                "half-integer phase {gamma2}/2 is not allowed for odd D = {}",
                ring.d()
            )));
        }
        Ok(PauliOp {
            ring,
            x: x.into_iter().map(|e| ring.reduce(e)).collect(),
            z: z.into_iter().map(|e| ring.reduce(e)).collect(),
            gamma2,
        })
    }

    pub fn identity(ring: RingParams, n: usize) -> Self {
        PauliOp { ring, x: vec![0; n], z: vec![0; n], gamma2: 0 }
    }

    /// `X_q^{xe} Z_q^{ze}` on `n` qudits.
    pub fn single(ring: RingParams, n: usize, q: usize, xe: u64, ze: u64) -> Self {
        let mut p = Self::identity(ring, n);
        p.x[q] = ring.reduce(xe);
        p.z[q] = ring.reduce(ze);
        p
    }

    /// From a stacked `(x; z)` vector of length `2n`, phase zero.
    pub fn from_symplectic(ring: RingParams, v: &[u64]) -> Self {
        let n = v.len() / 2;
        PauliOp {
            ring,
            x: v[..n].iter().map(|&e| ring.reduce(e)).collect(),
            z: v[n..].iter().map(|&e| ring.reduce(e)).collect(),
            gamma2: 0,
        }
    }

    pub fn num_qudits(&self) -> usize {
        self.x.len()
    }

    pub fn d(&self) -> u64 {
        self.ring.d()
    }

    /// Stacked `(x; z)` module element.
    pub fn symplectic(&self) -> Vec<u64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.z);
        v
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&e| e == 0)
    }

    pub fn with_phase(mut self, gamma2: i64) -> Self {
        self.gamma2 = gamma2.rem_euclid(2 * self.d() as i64) as u64;
        self
    }

    /// Same exponents, phase set to zero.
    pub fn unphased(&self) -> Self {
        PauliOp { gamma2: 0, ..self.clone() }
    }

    fn check_compatible(&self, other: &PauliOp) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.d(), other.d()));
        }
        if self.num_qudits() != other.num_qudits() {
            return Err(Error::DimensionMismatch(format!("{} vs {} qudits", self.num_qudits(), other.num_qudits())));
        }
        Ok(())
    }

    /// `a · b = ω^{z_a·x_b} σ_{a+b}` with phases composed.
    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        self.check_compatible(other)?;
        let r = self.ring;
        let two_d = 2 * r.d();
        let cross = dot(r, &self.z, &other.x);
        let gamma2 = (self.gamma2 + other.gamma2 + 2 * cross) % two_d;
        Ok(PauliOp {
            ring: r,
            x: self.x.iter().zip(&other.x).map(|(&a, &b)| r.add(a, b)).collect(),
            z: self.z.iter().zip(&other.z).map(|(&a, &b)| r.add(a, b)).collect(),
            gamma2,
        })
    }

    /// `(ω^γ σ_μ)^k = ω^{kγ + (z·x) k(k-1)/2} σ_{kμ}`.
    pub fn pow(&self, k: u64) -> PauliOp {
        let r = self.ring;
        let two_d = 2 * r.d() as u128;
        let zx = dot(r, &self.z, &self.x) as u128;
        let k128 = k as u128;
        let tri = (k128 * k128.saturating_sub(1)) % two_d;
        let gamma2 = ((self.gamma2 as u128 * k128 + zx * tri) % two_d) as u64;
        PauliOp {
            ring: r,
            x: self.x.iter().map(|&e| r.mul(e, k)).collect(),
            z: self.z.iter().map(|&e| r.mul(e, k)).collect(),
            gamma2,
        }
    }

    /// Exact inverse `ω^{-γ + z·x} σ_{-μ}`.
    pub fn inverse(&self) -> PauliOp {
        let r = self.ring;
        let two_d = 2 * r.d();
        let zx = dot(r, &self.z, &self.x);
        PauliOp {
            ring: r,
            x: self.x.iter().map(|&e| r.neg(e)).collect(),
            z: self.z.iter().map(|&e| r.neg(e)).collect(),
            gamma2: (two_d - self.gamma2 % two_d + 2 * zx) % two_d,
        }
    }

    /// The factor on `qudits`, in the listed order, with phase zero.
    pub fn restrict(&self, qudits: &[usize]) -> PauliOp {
        PauliOp {
            ring: self.ring,
            x: qudits.iter().map(|&q| self.x[q]).collect(),
            z: qudits.iter().map(|&q| self.z[q]).collect(),
            gamma2: 0,
        }
    }

    /// Whether the operator acts trivially outside `qudits`.
    pub fn supported_on(&self, qudits: &[usize]) -> bool {
        (0..self.num_qudits()).all(|q| qudits.contains(&q) || (self.x[q] == 0 && self.z[q] == 0))
    }

    /// `σ^D = I` exactly; required of every stabilizer element.
    pub fn order_phase_ok(&self) -> bool {
        self.pow(self.d()).gamma2 == 0
    }
}

/// `c` with `σ_a σ_b = ω^c σ_b σ_a`, i.e. `b^T Ω a`.
pub fn commutation_phase(a: &PauliOp, b: &PauliOp) -> Result<u64> {
    a.check_compatible(b)?;
    let r = a.ring;
    Ok(r.sub(dot(r, &b.x, &a.z), dot(r, &b.z, &a.x)))
}

/// `a^T Ω_party b` over the listed qudits. Summed over a partition this equals
/// `commutation_phase(b, a)`.
pub fn restricted_commutation_phase(a: &PauliOp, b: &PauliOp, party: &[usize]) -> Result<u64> {
    a.check_compatible(b)?;
    let r = a.ring;
    let mut acc = 0;
    for &q in party {
        if q >= a.num_qudits() {
            return Err(Error::DimensionMismatch(format!("qudit {q} out of range")));
        }
        acc = r.add(acc, r.sub(r.mul(a.x[q], b.z[q]), r.mul(a.z[q], b.x[q])));
    }
    Ok(acc)
}

/// The bilinear form `Ω_N`, optionally restricted to a subset of qudits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n: usize,
    pub restriction: Option<Vec<usize>>,
}

impl SymplecticForm {
    pub fn full(n: usize) -> Self {
        SymplecticForm { n, restriction: None }
    }

    pub fn restricted(n: usize, qudits: Vec<usize>) -> Self {
        SymplecticForm { n, restriction: Some(qudits) }
    }

    fn qudits(&self) -> Vec<usize> {
        self.restriction.clone().unwrap_or_else(|| (0..self.n).collect())
    }

    /// `u^T Ω v` for stacked `(x; z)` vectors.
    pub fn eval(&self, ring: RingParams, u: &[u64], v: &[u64]) -> u64 {
        let n = self.n;
        self.qudits()
            .into_iter()
            .fold(0, |acc, q| ring.add(acc, ring.sub(ring.mul(u[q], v[n + q]), ring.mul(u[n + q], v[q]))))
    }

    pub fn matrix(&self, ring: RingParams) -> ModMatrix {
        let n = self.n;
        let mut m = ModMatrix::zeros(ring, 2 * n, 2 * n);
        for q in self.qudits() {
            m.set(q, n + q, 1);
            m.set(n + q, q, ring.neg(1));
        }
        m
    }
}

impl fmt::Display for PauliOp {
    /// `w^<k> X<i>^<e> Z<i>^<e> ...`, with `w^<g>/2` for odd doubled phases and
    /// `I` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.gamma2 != 0 {
            if self.gamma2.is_multiple_of(2) {
                parts.push(format!("w^{}", self.gamma2 / 2));
            } else {
                parts.push(format!("w^{}/2", self.gamma2));
            }
        }
        let mut any = false;
        for q in 0..self.num_qudits() {
            for (letter, e) in [('X', self.x[q]), ('Z', self.z[q])] {
                if e == 0 {
                    continue;
                }
                any = true;
                if e == 1 {
                    parts.push(format!("{letter}{q}"));
                } else {
                    parts.push(format!("{letter}{q}^{e}"));
                }
            }
        }
        if !any {
            parts.push("I".to_string());
        }
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(d: u64) -> RingParams {
        RingParams::new(d).unwrap()
    }

    fn op(d: u64, x: &[u64], z: &[u64]) -> PauliOp {
        PauliOp::new(ring(d), x.to_vec(), z.to_vec(), 0).unwrap()
    }

    #[test]
    fn z_times_x_over_z4() {
        let zx = op(4, &[0], &[1]).multiply(&op(4, &[1], &[0])).unwrap();
        assert_eq!((zx.x[0], zx.z[0], zx.gamma2), (1, 1, 2));
    }

    #[test]
    fn identity_and_squares() {
        let a = op(9, &[2, 5], &[7, 1]).with_phase(4);
        assert_eq!(a.multiply(&PauliOp::identity(ring(9), 2)).unwrap(), a);
        let xx = op(3, &[1], &[0]).multiply(&op(3, &[1], &[0])).unwrap();
        assert_eq!((xx.x[0], xx.z[0], xx.gamma2), (2, 0, 0));
    }

    #[test]
    fn commutation_examples() {
        assert_eq!(commutation_phase(&op(4, &[1], &[0]), &op(4, &[0], &[1])).unwrap(), 3);
        let a = op(9, &[1, 1, 1], &[0, 0, 0]);
        assert_eq!(commutation_phase(&a, &a).unwrap(), 0);
        let b = op(9, &[0, 0, 0], &[1, 8, 0]);
        assert_eq!(commutation_phase(&a, &b).unwrap(), 0);
    }

    #[test]
    fn restricted_examples() {
        let a = op(9, &[1, 1, 1], &[0, 0, 0]);
        let b = op(9, &[0, 0, 0], &[1, 8, 0]);
        assert_eq!(restricted_commutation_phase(&a, &b, &[0]).unwrap(), 1);
        assert_eq!(restricted_commutation_phase(&a, &b, &[]).unwrap(), 0);
        let a3 = op(3, &[1, 1, 1], &[0, 0, 0]);
        let b3 = op(3, &[0, 0, 0], &[0, 1, 2]);
        assert_eq!(restricted_commutation_phase(&a3, &b3, &[1]).unwrap(), 1);
    }

    #[test]
    fn odd_dimension_rejects_half_phase() {
        assert!(PauliOp::new(ring(3), vec![1], vec![0], 1).is_err());
        assert!(PauliOp::new(ring(2), vec![1], vec![1], 1).is_ok());
    }

    #[test]
    fn display_format() {
        let p = PauliOp::new(ring(9), vec![1, 0, 3], vec![0, 8, 0], 4).unwrap();
        assert_eq!(p.to_string(), "w^2 X0 Z1^8 X2^3");
        let h = PauliOp::new(ring(2), vec![1], vec![1], 1).unwrap();
        assert_eq!(h.to_string(), "w^1/2 X0 Z0");
        assert_eq!(PauliOp::identity(ring(5), 2).to_string(), "I");
    }

    #[test]
    fn symplectic_form_matrix() {
        let r = ring(9);
        let f = SymplecticForm::full(2);
        let m = f.matrix(r);
        let u = [1, 2, 3, 4];
        let v = [5, 6, 7, 8];
        let mv = m.mul_vec(&v).unwrap();
        assert_eq!(crate::linalg::dot(r, &u, &mv), f.eval(r, &u, &v));
        let g = SymplecticForm::restricted(2, vec![1]);
        assert_eq!(g.eval(r, &u, &v), r.sub(r.mul(2, 8), r.mul(4, 6)));
    }

    fn arb_op(d: u64, n: usize) -> impl Strategy<Value = PauliOp> {
        let step = if d % 2 == 1 { 2 } else { 1 };
        (prop::collection::vec(0..d, n), prop::collection::vec(0..d, n), (0..d).prop_map(move |g| g * step))
            .prop_map(move |(x, z, g)| PauliOp::new(ring(d), x, z, g as i64).unwrap())
    }

    fn triple() -> impl Strategy<Value = (PauliOp, PauliOp, PauliOp, Vec<usize>)> {
        (prop::sample::select(vec![2u64, 3, 4, 6, 8, 9]), 1usize..4)
            .prop_flat_map(|(d, n)| (arb_op(d, n), arb_op(d, n), arb_op(d, n), prop::collection::vec(0usize..3, n)))
    }

    proptest! {
        #[test]
        fn multiply_is_associative((a, b, c, _) in triple()) {
            let l = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn commutation_is_antisymmetric((a, b, _, _) in triple()) {
            let r = a.ring;
            prop_assert_eq!(commutation_phase(&a, &b).unwrap(), r.neg(commutation_phase(&b, &a).unwrap()));
        }

        #[test]
        fn commutation_matches_products((a, b, _, _) in triple()) {
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            let c = commutation_phase(&a, &b).unwrap();
            prop_assert_eq!(ab.gamma2, (ba.gamma2 + 2 * c) % (2 * a.d()));
        }

        #[test]
        fn partition_sum_is_full_form((a, b, _, labels) in triple()) {
            let r = a.ring;
            let mut total = 0;
            for party in 0..3 {
                let qs: Vec<usize> = labels.iter().enumerate().filter(|(_, &l)| l == party).map(|(q, _)| q).collect();
                total = r.add(total, restricted_commutation_phase(&a, &b, &qs).unwrap());
            }
            prop_assert_eq!(total, commutation_phase(&b, &a).unwrap());
        }

        #[test]
        fn pow_matches_repeated_multiplication((a, _, _, _) in triple(), k in 0u64..12) {
            let mut acc = PauliOp::identity(a.ring, a.num_qudits());
            for _ in 0..k {
                acc = acc.multiply(&a).unwrap();
            }
            prop_assert_eq!(a.pow(k), acc);
        }

        #[test]
        fn inverse_is_exact((a, _, _, _) in triple()) {
            let id = a.multiply(&a.inverse()).unwrap();
            prop_assert_eq!(id, PauliOp::identity(a.ring, a.num_qudits()));
        }
    }
}
