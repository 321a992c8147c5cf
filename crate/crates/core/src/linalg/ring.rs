use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted by default. Products of two residues stay well
/// inside `u64`.
pub const DEFAULT_MODULUS_CAP: u64 = 1 << 20;

/// The residue ring `Z_D`. When `D = p^n` the prime and exponent are cached,
/// which is what the span machinery and the decomposition engine require.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct RingParams {
    d: u64,
    prime_power: Option<(u64, u32)>,
}

impl TryFrom<u64> for RingParams {
    type Error = Error;
    fn try_from(d: u64) -> Result<Self> {
        RingParams::new(d)
    }
}

impl From<RingParams> for u64 {
    fn from(r: RingParams) -> u64 {
        r.d
    }
}

impl RingParams {
    /// General modulus `D >= 2`, capped at [`DEFAULT_MODULUS_CAP`].
    pub fn new(d: u64) -> Result<Self> {
        Self::new_with_cap(d, DEFAULT_MODULUS_CAP)
    }

    pub fn new_with_cap(d: u64, cap: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidModulus(d, "modulus must be at least 2"));
        }
        if d > cap {
            return Err(Error::InvalidModulus(d, "modulus exceeds the configured cap"));
        }
        let f = factorize(d);
        let prime_power = if f.len() == 1 { Some(f[0]) } else { None };
        Ok(RingParams { d, prime_power })
    }

    /// `Z_{p^n}`; `p` is checked for primality by trial division.
    pub fn prime_power(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidModulus(p, "p must be prime"));
        }
        if n == 0 {
            return Err(Error::InvalidModulus(1, "n must be positive"));
        }
        let d = p.checked_pow(n).ok_or(Error::InvalidModulus(p, "p^n overflows"))?;
        Self::new(d)
    }

    #[inline]
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_prime_power(&self) -> bool {
        self.prime_power.is_some()
    }

    /// `(p, n)` for a prime-power modulus.
    pub fn pn(&self) -> Option<(u64, u32)> {
        self.prime_power
    }

    pub fn p(&self) -> Option<u64> {
        self.prime_power.map(|x| x.0)
    }

    pub fn n(&self) -> Option<u32> {
        self.prime_power.map(|x| x.1)
    }

    pub fn expect_pn(&self) -> Result<(u64, u32)> {
        self.prime_power.ok_or(Error::InvalidModulus(self.d, "a prime-power modulus is required"))
    }

    pub fn factors(&self) -> Vec<(u64, u32)> {
        factorize(self.d)
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.d
    }

    #[inline]
    pub fn reduce_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.d as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.d
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.d - b % self.d) % self.d
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.d - a % self.d) % self.d
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.d as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.d;
        a %= self.d;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u64) -> bool {
        gcd(a % self.d, self.d) == 1
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        let (g, s, _) = ext_gcd(a as i128 % self.d as i128, self.d as i128);
        if g != 1 {
            return None;
        }
        Some(s.rem_euclid(self.d as i128) as u64)
    }

    /// Additive order of a residue: `D / gcd(a, D)`.
    pub fn order(&self, a: u64) -> u64 {
        self.d / gcd(a % self.d, self.d)
    }

    /// p-adic valuation of a residue, `n` for zero.
    pub fn valuation(&self, a: u64) -> Result<u32> {
        let (p, n) = self.expect_pn()?;
        let mut a = a % self.d;
        if a == 0 {
            return Ok(n);
        }
        let mut v = 0;
        while a.is_multiple_of(p) {
            a /= p;
            v += 1;
        }
        Ok(v)
    }

    /// Unit `w` with `w * a = gcd(a, D)`; used to normalise Howell pivots.
    pub fn normalizing_unit(&self, a: u64) -> u64 {
        let a = a % self.d;
        if a == 0 {
            return 1 % self.d;
        }
        let g = gcd(a, self.d);
        let a1 = a / g;
        let d1 = self.d / g;
        let w0 = if d1 == 1 {
            0
        } else {
            let (_, s, _) = ext_gcd(a1 as i128, d1 as i128);
            s.rem_euclid(d1 as i128) as u64
        };
        let mut w = w0;
        while gcd(w, self.d) != 1 {
            w += d1;
        }
        w % self.d
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid on integers: returns `(g, s, t)` with `s*a + t*b = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= p {
        if p.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Trial-division factorisation into `(prime, exponent)` pairs, ascending.
pub fn factorize(mut d: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= d {
        if d.is_multiple_of(f) {
            let mut e = 0;
            while d.is_multiple_of(f) {
                d /= f;
                e += 1;
            }
            out.push((f, e));
        }
        f += 1;
    }
    if d > 1 {
        out.push((d, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_construction() {
        let r = RingParams::prime_power(3, 2).unwrap();
        assert_eq!(r.d(), 9);
        assert_eq!(r.pn(), Some((3, 2)));
        assert!(RingParams::prime_power(4, 2).is_err());
        assert!(RingParams::new(1).is_err());
        assert!(RingParams::new(6).unwrap().pn().is_none());
        assert!(RingParams::new((1 << 20) + 1).is_err());
    }

    #[test]
    fn normalizing_unit_hits_gcd() {
        for d in [4u64, 8, 9, 12, 27] {
            let r = RingParams::new(d).unwrap();
            for a in 1..d {
                let w = r.normalizing_unit(a);
                assert!(r.is_unit(w));
                assert_eq!(r.mul(w, a), gcd(a, d));
            }
        }
    }

    #[test]
    fn valuation_and_order() {
        let r = RingParams::prime_power(3, 2).unwrap();
        assert_eq!(r.valuation(3).unwrap(), 1);
        assert_eq!(r.valuation(0).unwrap(), 2);
        assert_eq!(r.order(3), 3);
        assert_eq!(r.order(1), 9);
        assert_eq!(r.inv(2), Some(5));
        assert_eq!(r.inv(3), None);
    }
}
