//! Howell normal form over `Z_D` and the span machinery built on it.
//!
//! A Howell basis has, for every column prefix `k`, the property that the rows
//! vanishing on the first `k` columns generate every span element vanishing
//! there. Span membership then reduces to a single top-down pass, and kernels
//! and intersections fall out of augmented matrices.

use serde::{Deserialize, Serialize};

use super::matrix::{ModMatrix, ModVec};
use super::ring::{ext_gcd, RingParams};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HowellForm {
    /// Canonical basis of the row span, one row per pivot.
    pub basis: ModMatrix,
    /// `(column, divisor)` per basis row; divisors divide `D`.
    pub pivots: Vec<(usize, u64)>,
    /// `transform * input == basis`.
    pub transform: ModMatrix,
}

struct Work {
    ring: RingParams,
    rows: Vec<Vec<u64>>,
    trans: Vec<Vec<u64>>,
}

impl Work {
    fn combine(&mut self, r: usize, i: usize, c: usize) {
        let ring = self.ring;
        let d = ring.d() as i128;
        let a = self.rows[r][c] as i128;
        let b = self.rows[i][c] as i128;
        let (g, s, t) = ext_gcd(a, b);
        let u = (b / g).rem_euclid(d) as u64;
        let v = (a / g).rem_euclid(d) as u64;
        let s = s.rem_euclid(d) as u64;
        let t = t.rem_euclid(d) as u64;
        let mix = |x: &[u64], y: &[u64]| -> (Vec<u64>, Vec<u64>) {
            let top = x.iter().zip(y).map(|(&p, &q)| ring.add(ring.mul(s, p), ring.mul(t, q))).collect();
            let bottom = x.iter().zip(y).map(|(&p, &q)| ring.sub(ring.mul(v, q), ring.mul(u, p))).collect();
            (top, bottom)
        };
        let (nr, ni) = mix(&self.rows[r], &self.rows[i]);
        self.rows[r] = nr;
        self.rows[i] = ni;
        let (tr, ti) = mix(&self.trans[r], &self.trans[i]);
        self.trans[r] = tr;
        self.trans[i] = ti;
    }

    fn scale(&mut self, r: usize, w: u64) {
        let ring = self.ring;
        self.rows[r].iter_mut().for_each(|x| *x = ring.mul(*x, w));
        self.trans[r].iter_mut().for_each(|x| *x = ring.mul(*x, w));
    }

    fn axpy(&mut self, target: usize, q: u64, src: usize) {
        let ring = self.ring;
        let (rs, ts) = (self.rows[src].clone(), self.trans[src].clone());
        for (x, y) in self.rows[target].iter_mut().zip(&rs) {
            *x = ring.sub(*x, ring.mul(q, *y));
        }
        for (x, y) in self.trans[target].iter_mut().zip(&ts) {
            *x = ring.sub(*x, ring.mul(q, *y));
        }
    }
}

/// Howell normal form of the row span of `m`.
pub fn howell_form(m: &ModMatrix) -> HowellForm {
    let ring = m.ring;
    let n_in = m.rows;
    let cols = m.cols;
    let mut w = Work {
        ring,
        rows: m.rows_vec(),
        trans: (0..n_in)
            .map(|i| {
                let mut t = vec![0; n_in];
                t[i] = 1 % ring.d();
                t
            })
            .collect(),
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(first) = (r..w.rows.len()).find(|&i| w.rows[i][c] != 0) else {
            continue;
        };
        w.rows.swap(r, first);
        w.trans.swap(r, first);
        for i in r + 1..w.rows.len() {
            if w.rows[i][c] != 0 {
                w.combine(r, i, c);
            }
        }
        let unit = ring.normalizing_unit(w.rows[r][c]);
        w.scale(r, unit);
        let d = w.rows[r][c];
        for i in 0..r {
            let q = w.rows[i][c] / d;
            if q != 0 {
                w.axpy(i, q, r);
            }
        }
        let ann = ring.d() / d;
        if ann != ring.d() {
            let row: Vec<u64> = w.rows[r].iter().map(|&x| ring.mul(x, ann)).collect();
            if row.iter().any(|&x| x != 0) {
                let tr = w.trans[r].iter().map(|&x| ring.mul(x, ann)).collect();
                w.rows.push(row);
                w.trans.push(tr);
            }
        }
        pivots.push((c, d));
        r += 1;
    }
    let basis = ModMatrix::from_rows(ring, cols, &w.rows[..r]).expect("consistent widths");
    let transform = ModMatrix::from_rows(ring, n_in, &w.trans[..r]).expect("consistent widths");
    HowellForm { basis, pivots, transform }
}

impl HowellForm {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Number of elements of the row span.
    pub fn span_size(&self) -> u128 {
        let d = self.basis.ring.d();
        self.pivots.iter().map(|&(_, piv)| (d / piv) as u128).product()
    }

    /// Reduces `v` against the basis. Returns the remainder and the basis
    /// coefficients consumed; `v` is in the span iff the remainder is zero.
    pub fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let ring = self.basis.ring;
        let mut rem: Vec<u64> = v.iter().map(|&x| ring.reduce(x)).collect();
        let mut coeffs = vec![0; self.rank()];
        for (i, &(c, d)) in self.pivots.iter().enumerate() {
            let q = rem[c] / d;
            if q == 0 {
                continue;
            }
            coeffs[i] = q;
            for (x, &b) in rem.iter_mut().zip(self.basis.row(i)) {
                *x = ring.sub(*x, ring.mul(q, b));
            }
        }
        (rem, coeffs)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        v.len() == self.basis.cols && self.reduce(v).0.iter().all(|&x| x == 0)
    }

    /// Coefficients `x` over the *input* rows with `x * input = v`, if any.
    pub fn express(&self, v: &[u64]) -> Option<Vec<u64>> {
        let (rem, coeffs) = self.reduce(v);
        if rem.iter().any(|&x| x != 0) {
            return None;
        }
        let ring = self.basis.ring;
        let mut x = vec![0; self.transform.cols];
        for (i, &q) in coeffs.iter().enumerate() {
            if q == 0 {
                continue;
            }
            for (xj, &t) in x.iter_mut().zip(self.transform.row(i)) {
                *xj = ring.add(*xj, ring.mul(q, t));
            }
        }
        Some(x)
    }
}

fn check_len(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch(format!("{what}: expected {expected}, got {got}")));
    }
    Ok(())
}

/// Solves `m x = b`. The returned solution is reduced modulo the Howell basis
/// of the kernel, so equal inputs give equal outputs.
pub fn solve(m: &ModMatrix, b: &ModVec) -> Result<Option<ModVec>> {
    check_len(m.rows, b.len(), "right-hand side length")?;
    let h = howell_form(&m.transpose());
    let Some(x) = h.express(&b.entries) else {
        return Ok(None);
    };
    let k = howell_form(&kernel(m));
    let (x, _) = k.reduce(&x);
    Ok(Some(ModVec { ring: m.ring, entries: x }))
}

/// Rows generating `{x : m x = 0}`.
pub fn kernel(m: &ModMatrix) -> ModMatrix {
    let ring = m.ring;
    let (r, c) = (m.rows, m.cols);
    let aug: Vec<Vec<u64>> = (0..c)
        .map(|j| {
            let mut row = m.col(j);
            row.extend((0..c).map(|k| if k == j { 1 % ring.d() } else { 0 }));
            row
        })
        .collect();
    let h = howell_form(&ModMatrix::from_rows(ring, r + c, &aug).expect("widths"));
    let rows: Vec<Vec<u64>> = (0..h.rank())
        .filter(|&i| h.basis.row(i)[..r].iter().all(|&x| x == 0))
        .map(|i| h.basis.row(i)[r..].to_vec())
        .collect();
    ModMatrix::from_rows(ring, c, &rows).expect("widths")
}

/// Rows generating `rowspan(a) ∩ rowspan(b)` (Zassenhaus construction).
pub fn span_intersection(a: &ModMatrix, b: &ModMatrix) -> Result<ModMatrix> {
    check_len(a.cols, b.cols, "ambient dimension")?;
    let ring = a.ring;
    let m = a.cols;
    let mut rows = Vec::with_capacity(a.rows + b.rows);
    for i in 0..a.rows {
        let mut row = a.row(i).to_vec();
        row.extend_from_slice(a.row(i));
        rows.push(row);
    }
    for i in 0..b.rows {
        let mut row = b.row(i).to_vec();
        row.extend(std::iter::repeat_n(0, m));
        rows.push(row);
    }
    let h = howell_form(&ModMatrix::from_rows(ring, 2 * m, &rows)?);
    let out: Vec<Vec<u64>> = (0..h.rank())
        .filter(|&i| h.basis.row(i)[..m].iter().all(|&x| x == 0))
        .map(|i| h.basis.row(i)[m..].to_vec())
        .collect();
    ModMatrix::from_rows(ring, m, &out)
}

/// Smallest positive `k` with `k v = 0`; `1` for the zero vector.
pub fn element_order(v: &ModVec) -> u64 {
    v.entries.iter().map(|&e| v.ring.order(e)).max().unwrap_or(1)
}

/// Whether `v` lies in the column span of `m`.
pub fn span_membership(v: &ModVec, m: &ModMatrix) -> Result<bool> {
    check_len(m.rows, v.len(), "vector length")?;
    Ok(howell_form(&m.transpose()).contains(&v.entries))
}

/// Inverse of a square matrix, `None` when it is not invertible.
pub fn inverse(m: &ModMatrix) -> Option<ModMatrix> {
    if m.rows != m.cols {
        return None;
    }
    let h = howell_form(m);
    (h.basis == ModMatrix::identity(m.ring, m.rows)).then_some(h.transform)
}
