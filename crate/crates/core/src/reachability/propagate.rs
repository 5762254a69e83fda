use crate::error::{Error, Result};
use crate::graphical::HarrisSystem;
use crate::renewal::RenewalTrain;

use super::region::{Seed, SeedSet, SpaceTimeRect};

/// How an infected interval was first reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    /// Directly from a seed; `latest` is the last seed instant inside the interval.
    Seed { latest: f64 },
    /// By the arrow `from_site → this site` at `time` (the interval start).
    Arrow { from_site: usize, time: f64 },
}

/// Maximal infected interval `{site} × [start, end)` of one renewal segment.
///
/// `end` is the next renewal mark after `start` or the region's time cap,
/// whichever comes first; `reaches_cap` says the cap itself is reached
/// (no mark in `(start, cap]`), in which case the interval is closed at `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectedInterval {
    pub start: f64,
    pub end: f64,
    pub reaches_cap: bool,
    pub origin: Origin,
    pub(crate) segment: usize,
}

impl InfectedInterval {
    /// Whether the time `t` (assumed not a renewal mark) is infected.
    pub fn covers(&self, t: f64) -> bool {
        self.start <= t && (t < self.end || (self.reaches_cap && t == self.end))
    }

    /// `(start, end, reaches_cap)`, ignoring provenance.
    pub fn span(&self) -> (f64, f64, bool) {
        (self.start, self.end, self.reaches_cap)
    }
}

/// Infected space-time set of a propagation, as sorted disjoint intervals per site.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectedIntervalSet {
    pub(crate) t_lo: f64,
    pub(crate) t_hi: f64,
    pub(crate) per_site: Vec<Vec<InfectedInterval>>,
}

impl InfectedIntervalSet {
    pub fn time_cap(&self) -> f64 {
        self.t_hi
    }

    pub fn num_sites(&self) -> usize {
        self.per_site.len()
    }

    pub fn intervals(&self, site: usize) -> &[InfectedInterval] {
        &self.per_site[site]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &InfectedInterval)> {
        self.per_site
            .iter()
            .enumerate()
            .flat_map(|(s, v)| v.iter().map(move |i| (s, i)))
    }

    pub fn len(&self) -> usize {
        self.per_site.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interval of `site` containing time `t`, if any.
    pub fn interval_at(&self, site: usize, t: f64) -> Option<&InfectedInterval> {
        let list = &self.per_site[site];
        let i = list.partition_point(|iv| iv.start <= t);
        i.checked_sub(1).map(|i| &list[i]).filter(|iv| iv.covers(t))
    }

    pub fn reaches_cap(&self) -> bool {
        self.iter().any(|(_, iv)| iv.reaches_cap)
    }

    /// Intervals with provenance stripped, for exact set comparisons.
    pub fn spans(&self) -> Vec<Vec<(f64, f64, bool)>> {
        self.per_site
            .iter()
            .map(|v| v.iter().map(InfectedInterval::span).collect())
            .collect()
    }

    /// Pointwise union of two propagations over the same region.
    pub fn union(&self, other: &InfectedIntervalSet) -> InfectedIntervalSet {
        assert_eq!(self.per_site.len(), other.per_site.len());
        let per_site = self
            .per_site
            .iter()
            .zip(&other.per_site)
            .map(|(a, b)| {
                let mut out: Vec<InfectedInterval> = Vec::with_capacity(a.len() + b.len());
                let mut all: Vec<InfectedInterval> = a.iter().chain(b).copied().collect();
                all.sort_by(|x, y| x.segment.cmp(&y.segment).then(x.start.total_cmp(&y.start)));
                for iv in all {
                    match out.last() {
                        Some(last) if last.segment == iv.segment => {}
                        _ => out.push(iv),
                    }
                }
                out
            })
            .collect();
        InfectedIntervalSet {
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            per_site,
        }
    }
}

struct Builder<'a> {
    trains: &'a [RenewalTrain],
    t_hi: f64,
    per_site: Vec<Vec<InfectedInterval>>,
}

impl Builder<'_> {
    /// End and cap flag of an interval starting at `t` on `site`.
    fn end_from(&self, site: usize, t: f64) -> (f64, bool) {
        match self.trains[site].next_mark_after(t) {
            Some(m) if m <= self.t_hi => (m, false),
            _ => (self.t_hi, true),
        }
    }

    fn slot(&self, site: usize, segment: usize) -> std::result::Result<usize, usize> {
        self.per_site[site].binary_search_by(|iv| iv.segment.cmp(&segment))
    }

    /// Insert unless the segment is already infected from an earlier time.
    fn insert(&mut self, site: usize, start: f64, origin: Origin) -> bool {
        let segment = self.trains[site].count_le(start);
        let (end, reaches_cap) = self.end_from(site, start);
        if !(start < end || reaches_cap) {
            return false;
        }
        let iv = InfectedInterval {
            start,
            end,
            reaches_cap,
            origin,
            segment,
        };
        match self.slot(site, segment) {
            Ok(i) => {
                let cur = &mut self.per_site[site][i];
                if start < cur.start {
                    *cur = iv;
                    true
                } else {
                    if let (Origin::Seed { latest }, Origin::Seed { latest: new }) =
                        (&mut cur.origin, origin)
                    {
                        *latest = latest.max(new);
                    }
                    false
                }
            }
            Err(i) => {
                self.per_site[site].insert(i, iv);
                true
            }
        }
    }

    fn infected_at(&self, site: usize, t: f64) -> bool {
        let train = &self.trains[site];
        if train.is_mark(t) {
            return false;
        }
        let segment = train.count_le(t);
        match self.slot(site, segment) {
            Ok(i) => self.per_site[site][i].covers(t),
            Err(_) => false,
        }
    }
}

/// Infected space-time set reached from `seeds` by paths staying inside `region`.
///
/// Arrows active at `lambda` are swept in time order; an arrow `x → y` at `u`
/// extends the infection iff `u` lies in an infected interval of `x`, `u` is
/// not a renewal mark of `y` and `y` is in the region. The new interval at `y`
/// runs to its next renewal mark, capped at the region's end time.
pub fn propagate(
    system: &HarrisSystem,
    lambda: f64,
    seeds: &SeedSet,
    region: &SpaceTimeRect,
) -> Result<InfectedIntervalSet> {
    let threshold = system.check_lambda(lambda)?;
    region.check_inside(system)?;
    let lattice = system.lattice();
    let region_sites = lattice.sites_in_box(&region.lo, &region.hi);
    let mut in_region = vec![false; lattice.num_sites()];
    for &s in &region_sites {
        in_region[s] = true;
    }

    let mut b = Builder {
        trains: system.trains(),
        t_hi: region.t_hi,
        per_site: vec![Vec::new(); lattice.num_sites()],
    };

    for seed in &seeds.0 {
        match *seed {
            Seed::Point { site, time } => {
                if site >= lattice.num_sites()
                    || !in_region[site]
                    || time < region.t_lo
                    || time > region.t_hi
                {
                    continue;
                }
                if b.trains[site].is_mark(time) {
                    return Err(Error::InvalidSeed {
                        site,
                        time,
                        reason: "seed instant is a renewal mark".into(),
                    });
                }
                b.insert(site, time, Origin::Seed { latest: time });
            }
            Seed::Segment { site, lo, hi } => {
                if site >= lattice.num_sites() || !in_region[site] {
                    continue;
                }
                let lo = lo.max(region.t_lo);
                let hi = hi.min(region.t_hi);
                if lo > hi {
                    continue;
                }
                let train = &system.trains()[site];
                let mut start = lo;
                loop {
                    // latest seed instant of this segment
                    let next = train.next_mark_after(start);
                    let latest = next.map_or(hi, |m| m.min(hi));
                    let degenerate = start == hi && train.is_mark(hi);
                    if !degenerate {
                        b.insert(site, start, Origin::Seed { latest });
                    }
                    match next {
                        Some(m) if m < hi => start = m,
                        _ => break,
                    }
                }
            }
        }
    }

    let mut events: Vec<(f64, usize, usize)> = Vec::new();
    for (e, &(from, to)) in system.edges().iter().enumerate() {
        if !(in_region[from] && in_region[to]) {
            continue;
        }
        let arrows = system.edge_arrows(e);
        let first = arrows.partition_point(|a| a.time < region.t_lo);
        for a in arrows[first..].iter().take_while(|a| a.time <= region.t_hi) {
            if a.mark <= threshold {
                events.push((a.time, from, to));
            }
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = events.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Tie(w[0].0));
    }

    for (u, from, to) in events {
        if !b.infected_at(from, u) || b.trains[to].is_mark(u) || b.infected_at(to, u) {
            continue;
        }
        b.insert(
            to,
            u,
            Origin::Arrow {
                from_site: from,
                time: u,
            },
        );
    }

    for list in &mut b.per_site {
        list.sort_by(|x, y| x.start.total_cmp(&y.start));
    }
    Ok(InfectedIntervalSet {
        t_lo: region.t_lo,
        t_hi: region.t_hi,
        per_site: b.per_site,
    })
}
