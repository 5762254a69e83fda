use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite box `∏ [lo_i, hi_i]` of `Z^d` with nearest-neighbour (ℓ₁ distance 1) edges.
///
/// Sites are numbered in row-major order with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Lattice {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidLattice(format!(
                "need matching nonempty extents, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::InvalidLattice(format!(
                "axis {i}: {} > {}",
                lo[i], hi[i]
            )));
        }
        Ok(Self { lo, hi })
    }

    /// One-dimensional lattice `[a, b] ∩ Z`.
    pub fn line(a: i64, b: i64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    /// Cube `[-half, half]^d`.
    pub fn centered(dim: usize, half: i64) -> Result<Self> {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn num_sites(&self) -> usize {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(i, &c)| self.lo[i] <= c && c <= self.hi[i])
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        Some(x.iter().enumerate().fold(0usize, |acc, (i, &c)| {
            acc * self.extent(i) + (c - self.lo[i]) as usize
        }))
    }

    pub fn coords(&self, mut index: usize) -> Vec<i64> {
        let mut x = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            let e = self.extent(i);
            x[i] = self.lo[i] + (index % e) as i64;
            index /= e;
        }
        x
    }

    /// Neighbours of `index` inside the box, axis by axis, `-1` before `+1`.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let x = self.coords(index);
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            for step in [-1i64, 1] {
                let mut y = x.clone();
                y[axis] += step;
                if let Some(j) = self.index(&y) {
                    out.push(j);
                }
            }
        }
        out
    }

    /// All ordered pairs of neighbouring sites, in a fixed order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_sites())
            .flat_map(|i| self.neighbors(i).into_iter().map(move |j| (i, j)))
            .collect()
    }

    /// Whether `other` is a sub-box of this lattice.
    pub fn contains_box(&self, lo: &[i64], hi: &[i64]) -> bool {
        self.contains(lo) && self.contains(hi) && lo.iter().zip(hi).all(|(a, b)| a <= b)
    }

    /// Site indices of the sub-box `[lo, hi]`.
    pub fn sites_in_box(&self, lo: &[i64], hi: &[i64]) -> Vec<usize> {
        (0..self.num_sites())
            .filter(|&i| {
                let x = self.coords(i);
                x.iter().enumerate().all(|(k, &c)| lo[k] <= c && c <= hi[k])
            })
            .collect()
    }
}
