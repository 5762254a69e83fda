use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphical::HarrisSystem;

/// Space-time rectangle: a lattice box (an integer interval when `d = 1`) times `[t_lo, t_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeRect {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl SpaceTimeRect {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>, t_lo: f64, t_hi: f64) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Precondition(format!(
                "bad spatial box {lo:?}..{hi:?}"
            )));
        }
        if !(t_lo <= t_hi) {
            return Err(Error::InvalidWindow { lo: t_lo, hi: t_hi });
        }
        Ok(Self { lo, hi, t_lo, t_hi })
    }

    /// `[a, b] × [s, t]` in one dimension.
    pub fn interval(a: i64, b: i64, s: f64, t: f64) -> Result<Self> {
        Self::new(vec![a], vec![b], s, t)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Check that the rectangle lies inside the system's box and horizon.
    pub(crate) fn check_inside(&self, system: &HarrisSystem) -> Result<()> {
        let lattice = system.lattice();
        if self.dim() != lattice.dim() || !lattice.contains_box(&self.lo, &self.hi) {
            return Err(Error::RegionOutsideSystem(format!(
                "sites {:?}..{:?} not inside lattice {:?}..{:?}",
                self.lo,
                self.hi,
                lattice.lo(),
                lattice.hi()
            )));
        }
        let h = system.horizon();
        if self.t_lo < h.lo || self.t_hi > h.hi {
            return Err(Error::RegionOutsideSystem(format!(
                "times [{}, {}] not inside horizon [{}, {}]",
                self.t_lo, self.t_hi, h.lo, h.hi
            )));
        }
        Ok(())
    }

    /// Site indices of the face `x_0 = coord` of the rectangle.
    pub(crate) fn face_sites(&self, system: &HarrisSystem, coord: i64) -> Vec<usize> {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo[0] = coord;
        hi[0] = coord;
        system.lattice().sites_in_box(&lo, &hi)
    }
}

/// One seed of a propagation: a space-time point or a vertical segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Seed {
    Point { site: usize, time: f64 },
    Segment { site: usize, lo: f64, hi: f64 },
}

/// Collection of seeds, by site index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedSet(pub Vec<Seed>);

impl SeedSet {
    pub fn point(site: usize, time: f64) -> Self {
        Self(vec![Seed::Point { site, time }])
    }

    pub fn segments(sites: &[usize], lo: f64, hi: f64) -> Self {
        Self(
            sites
                .iter()
                .map(|&site| Seed::Segment { site, lo, hi })
                .collect(),
        )
    }

    pub fn union(&self, other: &SeedSet) -> SeedSet {
        SeedSet(self.0.iter().chain(&other.0).copied().collect())
    }
}
