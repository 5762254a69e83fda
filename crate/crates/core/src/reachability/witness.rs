use crate::error::{Error, Result};
use crate::graphical::HarrisSystem;

use super::propagate::{InfectedIntervalSet, Origin};

/// Piecewise-constant path: the walker sits on `legs[i].0` from `legs[i].1`
/// until the next leg's entry time, and on the last site until `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathWitness {
    pub legs: Vec<(usize, f64)>,
    pub end: f64,
}

impl PathWitness {
    pub fn start(&self) -> (usize, f64) {
        self.legs[0]
    }

    pub fn finish(&self) -> (usize, f64) {
        (self.legs.last().expect("nonempty witness").0, self.end)
    }

    /// `max γ − min γ` along the first coordinate axis.
    pub fn variation(&self, system: &HarrisSystem) -> i64 {
        let xs: Vec<i64> = self
            .legs
            .iter()
            .map(|&(s, _)| system.lattice().coords(s)[0])
            .collect();
        xs.iter().max().unwrap() - xs.iter().min().unwrap()
    }

    /// Independent re-check of the path conditions against the raw system.
    ///
    /// Each leg must avoid the renewal marks of its site (closed at the end
    /// of the last leg), consecutive legs must be neighbours joined by an
    /// arrow active at `lambda` at exactly the jump time, and jump times must
    /// increase strictly.
    pub fn validate(&self, system: &HarrisSystem, lambda: f64) -> Result<()> {
        let threshold = system.check_lambda(lambda)?;
        let fail = |msg: String| Err(Error::Precondition(msg));
        if self.legs.is_empty() {
            return fail("empty witness".into());
        }
        for (i, &(site, entry)) in self.legs.iter().enumerate() {
            let last = i + 1 == self.legs.len();
            let exit = if last { self.end } else { self.legs[i + 1].1 };
            if !(entry <= exit) || (!last && entry >= exit) {
                return fail(format!("leg {i}: times not increasing ({entry} -> {exit})"));
            }
            let train = system.train(site);
            let hit = train.marks_in(entry, exit);
            let bad = if last {
                !hit.is_empty()
            } else {
                hit.iter().any(|&m| m < exit)
            };
            if bad {
                return fail(format!(
                    "leg {i}: site {site} has a renewal mark in [{entry}, {exit}]"
                ));
            }
            if i > 0 {
                let from = self.legs[i - 1].0;
                let Some(e) = system.edges().iter().position(|&edge| edge == (from, site)) else {
                    return fail(format!("leg {i}: {from} -> {site} is not an edge"));
                };
                let arrows = system.edge_arrows(e);
                let k = arrows.partition_point(|a| a.time < entry);
                if !arrows
                    .get(k)
                    .is_some_and(|a| a.time == entry && a.mark <= threshold)
                {
                    return fail(format!(
                        "leg {i}: no active arrow {from} -> {site} at {entry}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Trace first-infection parents back from the infected point `(site, time)`.
pub fn extract_witness(
    system: &HarrisSystem,
    set: &InfectedIntervalSet,
    site: usize,
    time: f64,
) -> Option<PathWitness> {
    let mut legs = Vec::new();
    let mut cur = (site, time);
    loop {
        let iv = set.interval_at(cur.0, cur.1)?;
        match iv.origin {
            Origin::Arrow { from_site, time: u } => {
                legs.push((cur.0, u));
                cur = (from_site, u);
            }
            Origin::Seed { latest } => {
                let start = if system.train(cur.0).is_mark(iv.start) {
                    0.5 * (iv.start + latest.min(cur.1))
                } else {
                    iv.start
                };
                legs.push((cur.0, start));
                break;
            }
        }
    }
    legs.reverse();
    Some(PathWitness { legs, end: time })
}
