use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphical::HarrisSystem;

use super::propagate::{propagate, InfectedInterval, InfectedIntervalSet};
use super::region::{Seed, SeedSet, SpaceTimeRect};
use super::witness::{extract_witness, PathWitness};

/// Earliest infected (non-mark) time of `iv` inside the closed window `[lo, hi]`.
fn hit_in_window(
    system: &HarrisSystem,
    site: usize,
    iv: &InfectedInterval,
    lo: f64,
    hi: f64,
) -> Option<f64> {
    let a = iv.start.max(lo);
    let (b, closed) = if iv.end <= hi {
        (iv.end, iv.reaches_cap)
    } else {
        (hi, true)
    };
    if a < b {
        if system.train(site).is_mark(a) {
            let next = system
                .train(site)
                .next_mark_after(a)
                .unwrap_or(f64::INFINITY)
                .min(b);
            Some(0.5 * (a + next))
        } else {
            Some(a)
        }
    } else if a == b && closed && !system.train(site).is_mark(a) {
        Some(a)
    } else {
        None
    }
}

/// Propagation plus a target point, if one was reached.
#[derive(Debug, Clone)]
pub struct CrossingOutcome {
    pub infected: InfectedIntervalSet,
    pub target: Option<(usize, f64)>,
}

impl CrossingOutcome {
    pub fn crossed(&self) -> bool {
        self.target.is_some()
    }

    pub fn witness(&self, system: &HarrisSystem) -> Option<PathWitness> {
        let (site, t) = self.target?;
        extract_witness(system, &self.infected, site, t)
    }
}

fn first_hit(
    system: &HarrisSystem,
    set: &InfectedIntervalSet,
    sites: &[usize],
    lo: f64,
    hi: f64,
) -> Option<(usize, f64)> {
    sites.iter().find_map(|&s| {
        set.intervals(s)
            .iter()
            .find_map(|iv| hit_in_window(system, s, iv, lo, hi))
            .map(|t| (s, t))
    })
}

/// Temporal crossing of `rect`: from the bottom edge to the top edge, inside `rect`.
///
/// Sites whose timeline has a mark exactly at the bottom time are not seeded.
pub fn temporal_crossing(
    system: &HarrisSystem,
    lambda: f64,
    rect: &SpaceTimeRect,
) -> Result<CrossingOutcome> {
    rect.check_inside(system)?;
    let sites = system.lattice().sites_in_box(&rect.lo, &rect.hi);
    let seeds = SeedSet(
        sites
            .iter()
            .filter(|&&s| !system.train(s).is_mark(rect.t_lo))
            .map(|&s| Seed::Point {
                site: s,
                time: rect.t_lo,
            })
            .collect(),
    );
    let infected = propagate(system, lambda, &seeds, rect)?;
    let target = infected
        .iter()
        .find(|(_, iv)| iv.reaches_cap)
        .map(|(s, _)| (s, rect.t_hi));
    Ok(CrossingOutcome { infected, target })
}

pub fn has_temporal_crossing(
    system: &HarrisSystem,
    lambda: f64,
    rect: &SpaceTimeRect,
) -> Result<bool> {
    Ok(temporal_crossing(system, lambda, rect)?.crossed())
}

/// Spatial crossing of `rect`: from the face `x_0 = lo_0` to the face `x_0 = hi_0`.
pub fn spatial_crossing(
    system: &HarrisSystem,
    lambda: f64,
    rect: &SpaceTimeRect,
) -> Result<CrossingOutcome> {
    rect.check_inside(system)?;
    let from = rect.face_sites(system, rect.lo[0]);
    let to = rect.face_sites(system, rect.hi[0]);
    let seeds = SeedSet::segments(&from, rect.t_lo, rect.t_hi);
    let infected = propagate(system, lambda, &seeds, rect)?;
    let target = first_hit(system, &infected, &to, rect.t_lo, rect.t_hi);
    Ok(CrossingOutcome { infected, target })
}

pub fn has_spatial_crossing(
    system: &HarrisSystem,
    lambda: f64,
    rect: &SpaceTimeRect,
) -> Result<bool> {
    Ok(spatial_crossing(system, lambda, rect)?.crossed())
}

/// Parameters of the diagonal crossing events of the interval chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalParams {
    pub c: f64,
    pub eps: f64,
    /// Spatial width `L` (sites `0..=L`).
    #[serde(rename = "L")]
    pub l: i64,
    /// Time scale `T`.
    #[serde(rename = "T")]
    pub t: f64,
    /// Time origin `v` of the chain.
    #[serde(default)]
    pub v: f64,
}

impl DiagonalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.5 && self.c < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "need 1/2 < c < 1, got c = {}",
                self.c
            )));
        }
        if !(self.eps > 0.0 && self.eps < self.c * self.t / 8.0) {
            return Err(Error::ParameterDomain(format!(
                "need 0 < eps < cT/8 = {}, got eps = {}",
                self.c * self.t / 8.0,
                self.eps
            )));
        }
        if self.l < 0 {
            return Err(Error::ParameterDomain(format!(
                "need L >= 0, got {}",
                self.l
            )));
        }
        Ok(())
    }

    /// Source window of event `j` of the chain.
    pub fn source(&self, j: usize) -> (f64, f64) {
        let lo = self.v + j as f64 * (self.c * self.t - self.eps);
        (lo, lo + self.eps)
    }

    /// Target window of event `j`.
    pub fn target(&self, j: usize) -> (f64, f64) {
        let (lo, hi) = self.source(j);
        (lo + self.c * self.t, hi + self.c * self.t)
    }

    /// Source and target sites of event `j` (alternating between `0` and `L`).
    pub fn ends(&self, j: usize) -> (i64, i64) {
        if j % 2 == 0 {
            (0, self.l)
        } else {
            (self.l, 0)
        }
    }
}

/// Crossing from `{from} × source(j)` to `{to} × target(j)` within `[0, L] × [source_lo, ∞)`.
pub fn diagonal_crossing(
    system: &HarrisSystem,
    lambda: f64,
    p: &DiagonalParams,
    j: usize,
) -> Result<CrossingOutcome> {
    p.validate()?;
    let lattice = system.lattice();
    if lattice.dim() != 1 {
        return Err(Error::Precondition(
            "diagonal events need a one-dimensional lattice".into(),
        ));
    }
    let (s_lo, s_hi) = p.source(j);
    let (t_lo, t_hi) = p.target(j);
    // paths ending in the target never need times past its top
    let rect = SpaceTimeRect::interval(0, p.l, s_lo, t_hi)?;
    rect.check_inside(system)?;
    let (from, to) = p.ends(j);
    let from = lattice.index(&[from]).expect("inside rect");
    let to = lattice.index(&[to]).expect("inside rect");
    let seeds = SeedSet::segments(&[from], s_lo, s_hi);
    let infected = propagate(system, lambda, &seeds, &rect)?;
    let target = first_hit(system, &infected, &[to], t_lo, t_hi);
    Ok(CrossingOutcome { infected, target })
}

/// Event `A_0` shifted to start at `p.v`.
pub fn detect_a0(system: &HarrisSystem, lambda: f64, p: &DiagonalParams) -> Result<bool> {
    Ok(diagonal_crossing(system, lambda, p, 0)?.crossed())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome {
    pub indicators: Vec<bool>,
    /// Set when events past the system horizon were dropped.
    pub truncated: bool,
}

/// Indicators of `A_0, …, A_m`, stopping at the first event leaving the horizon.
pub fn detect_chain(
    system: &HarrisSystem,
    lambda: f64,
    m: usize,
    p: &DiagonalParams,
) -> Result<ChainOutcome> {
    p.validate()?;
    let mut indicators = Vec::with_capacity(m + 1);
    for j in 0..=m {
        if p.target(j).1 > system.horizon().hi {
            return Ok(ChainOutcome {
                indicators,
                truncated: true,
            });
        }
        indicators.push(diagonal_crossing(system, lambda, p, j)?.crossed());
    }
    Ok(ChainOutcome {
        indicators,
        truncated: false,
    })
}

/// Temporal crossing of some sub-box whose extent along axis 0 has length `< w`.
///
/// Windows of `min(w, b − a + 1)` sites are slid one site at a time; smaller
/// windows need not be tried since crossings persist when the window grows.
pub fn windowed_temporal_crossing(
    system: &HarrisSystem,
    lambda: f64,
    rect: &SpaceTimeRect,
    w: i64,
) -> Result<bool> {
    rect.check_inside(system)?;
    let span = rect.hi[0] - rect.lo[0] + 1;
    if w < 1 {
        return Err(Error::ParameterDomain(format!(
            "window width must be >= 1, got {w}"
        )));
    }
    let w = w.min(span);
    for a in rect.lo[0]..=rect.hi[0] - w + 1 {
        let mut sub = rect.clone();
        sub.lo[0] = a;
        sub.hi[0] = a + w - 1;
        if has_temporal_crossing(system, lambda, &sub)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Survival {
    /// Infection died out; the time of the last recovery.
    Died(f64),
    /// Infection still present at the cap.
    Censored(f64),
}

impl Survival {
    pub fn is_censored(&self) -> bool {
        matches!(self, Survival::Censored(_))
    }

    pub fn time(&self) -> f64 {
        match *self {
            Survival::Died(t) | Survival::Censored(t) => t,
        }
    }
}

/// Extinction time of the process started from `origin` at the horizon start, observed up to `cap`.
pub fn survival_time(
    system: &HarrisSystem,
    lambda: f64,
    origin: usize,
    cap: f64,
) -> Result<Survival> {
    let h = system.horizon();
    let lattice = system.lattice();
    let rect = SpaceTimeRect::new(
        lattice.lo().to_vec(),
        lattice.hi().to_vec(),
        h.lo,
        cap.min(h.hi),
    )?;
    let set = propagate(system, lambda, &SeedSet::point(origin, h.lo), &rect)?;
    if set.reaches_cap() {
        return Ok(Survival::Censored(rect.t_hi));
    }
    Ok(Survival::Died(
        set.iter().map(|(_, iv)| iv.end).fold(h.lo, f64::max),
    ))
}
