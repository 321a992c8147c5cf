use std::fmt;

use serde::{Deserialize, Serialize};

use super::ring::RingParams;
use crate::error::{Error, Result};

/// A vector over `Z_D` with every entry in `[0, D)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModVec {
    pub ring: RingParams,
    pub entries: Vec<u64>,
}

impl ModVec {
    pub fn new(ring: RingParams, entries: Vec<u64>) -> Self {
        let entries = entries.into_iter().map(|e| ring.reduce(e)).collect();
        ModVec { ring, entries }
    }

    pub fn from_i64(ring: RingParams, entries: &[i64]) -> Self {
        let entries = entries.iter().map(|&e| ring.reduce_i64(e)).collect();
        ModVec { ring, entries }
    }

    pub fn zeros(ring: RingParams, len: usize) -> Self {
        ModVec { ring, entries: vec![0; len] }
    }

    pub fn unit(ring: RingParams, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(ring, len);
        v.entries[i] = 1 % ring.d();
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn scale(&self, c: u64) -> ModVec {
        let r = self.ring;
        ModVec { ring: r, entries: self.entries.iter().map(|&e| r.mul(e, c)).collect() }
    }

    pub fn add(&self, other: &ModVec) -> ModVec {
        let r = self.ring;
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| r.add(a, b)).collect();
        ModVec { ring: r, entries }
    }

    pub fn sub(&self, other: &ModVec) -> ModVec {
        let r = self.ring;
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| r.sub(a, b)).collect();
        ModVec { ring: r, entries }
    }

    pub fn dot(&self, other: &ModVec) -> u64 {
        dot(self.ring, &self.entries, &other.entries)
    }
}

pub(crate) fn dot(r: RingParams, a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| r.add(acc, r.mul(x, y)))
}

/// Dense row-major matrix over `Z_D`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModMatrix {
    pub ring: RingParams,
    pub rows: usize,
    pub cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ModMatrix over Z_{} ({}x{})", self.ring.d(), self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl ModMatrix {
    pub fn zeros(ring: RingParams, rows: usize, cols: usize) -> Self {
        ModMatrix { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: RingParams, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(ring: RingParams, cols: usize, rows: &[Vec<u64>]) -> Result<Self> {
        let mut m = Self::zeros(ring, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!("row {i} has length {}, expected {cols}", row.len())));
            }
            for (j, &x) in row.iter().enumerate() {
                m.data[i * cols + j] = ring.reduce(x);
            }
        }
        Ok(m)
    }

    pub fn from_i64(ring: RingParams, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(ring, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix literal");
            for (j, &x) in row.iter().enumerate() {
                m.data[i * cols + j] = ring.reduce_i64(x);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u64) {
        if i < self.rows && j < self.cols {
            self.data[i * self.cols + j] = self.ring.reduce(x);
        }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> ModVec {
        ModVec { ring: self.ring, entries: self.row(i).to_vec() }
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn rows_vec(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> ModMatrix {
        let mut t = Self::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &ModMatrix) -> Result<ModMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = self.ring;
        let mut out = Self::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = r.add(out.data[idx], r.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.ring, self.row(i), v)).collect())
    }

    pub fn add(&self, other: &ModMatrix) -> Result<ModMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix sum of unequal shapes".into()));
        }
        let r = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.add(a, b)).collect();
        Ok(ModMatrix { ring: r, rows: self.rows, cols: self.cols, data })
    }

    pub fn neg(&self) -> ModMatrix {
        let r = self.ring;
        ModMatrix { ring: r, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| r.neg(a)).collect() }
    }

    /// Entrywise reduction into a smaller ring `Z_{D'}` with `D' | D`.
    pub fn reduce_into(&self, target: RingParams) -> ModMatrix {
        ModMatrix {
            ring: target,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| target.reduce(a)).collect(),
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &ModMatrix) -> Result<ModMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch("vstack of unequal widths".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(ModMatrix { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data })
    }
}
