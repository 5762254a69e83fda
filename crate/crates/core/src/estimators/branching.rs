use serde::{Deserialize, Serialize};

use super::estimate::{run_replicates, Estimate};
use super::survival::SurvivalSetup;
use crate::error::{Error, Result};
use crate::graphical::HarrisSystem;
use crate::reachability::{propagate, InfectedIntervalSet, Origin, SeedSet, SpaceTimeRect};
use crate::renewal::InterarrivalLaw;
use crate::rng::{stream_rng, Stream};
use crate::stats::t_interval;

/// Estimate of `C = sup_t E|I_t|` and the resulting extinction rate `λ₀ = 1/(2Cd)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingBound {
    pub dim: usize,
    /// Mean length of the renewal interval straddling each grid time.
    pub per_t: Vec<(f64, Estimate)>,
    pub c_hat: f64,
    pub c_se: f64,
    /// Grid time attaining `c_hat`.
    pub t_star: f64,
    pub lambda0: f64,
    pub lambda0_lo: f64,
    pub lambda0_hi: f64,
}

/// Lengths of the interarrival intervals straddling each of `ts` (sorted), for a train started at 0.
pub(crate) fn straddling_lengths<R: rand::Rng>(
    law: &InterarrivalLaw,
    ts: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(ts.len());
    let mut prev = 0.0;
    let mut next = law.sample(rng);
    for &t in ts {
        while next <= t {
            prev = next;
            next += law.sample(rng);
        }
        out.push(next - prev);
    }
    out
}

pub fn branching_bound(
    law: &InterarrivalLaw,
    dim: usize,
    t_grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<BranchingBound> {
    law.validate()?;
    if !law.has_finite_moment(2.0) {
        return Err(Error::Precondition(format!(
            "{} has an infinite second moment",
            law.name()
        )));
    }
    if dim == 0 || t_grid.is_empty() || n < 2 {
        return Err(Error::Precondition(
            "need dim >= 1, a nonempty time grid and n >= 2".into(),
        ));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let samples = run_replicates(n, seed, |_, s| {
        let mut rng = stream_rng(s, Stream::Train(0));
        Ok(straddling_lengths(law, &grid, &mut rng))
    })?;
    let mut per_t = Vec::with_capacity(grid.len());
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0, 0.0);
    for (j, &t) in grid.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|v| v[j]).collect();
        let (mean, lo, hi, se) = t_interval(&xs);
        per_t.push((
            t,
            Estimate {
                mean,
                n,
                ci_lo: lo,
                ci_hi: hi,
                seed,
            },
        ));
        if mean > best.0 {
            best = (mean, se, t, lo, hi);
        }
    }
    let (c_hat, c_se, t_star, c_lo, c_hi) = best;
    let d = dim as f64;
    Ok(BranchingBound {
        dim,
        per_t,
        c_hat,
        c_se,
        t_star,
        lambda0: 1.0 / (2.0 * c_hat * d),
        lambda0_lo: 1.0 / (2.0 * c_hi * d),
        lambda0_hi: if c_lo > 0.0 {
            1.0 / (2.0 * c_lo * d)
        } else {
            f64::INFINITY
        },
    })
}

/// Infected intervals and emitted arrows by generation of first infection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationCensus {
    /// `intervals[g]`: infected intervals of generation `g`.
    pub intervals: Vec<u64>,
    /// `arrows[g]`: active arrows leaving generation-`g` intervals, including
    /// those landing on sites that are already infected.
    pub arrows: Vec<u64>,
    pub total: u64,
}

impl GenerationCensus {
    pub fn count(&self, g: usize) -> u64 {
        self.intervals.get(g).copied().unwrap_or(0)
    }
}

fn interval_index(set: &InfectedIntervalSet, site: usize, t: f64) -> Option<usize> {
    let list = set.intervals(site);
    let i = list.partition_point(|iv| iv.start <= t).checked_sub(1)?;
    list[i].covers(t).then_some(i)
}

/// Generation census of the process started from `origin` at the horizon start.
pub fn generation_census(
    system: &HarrisSystem,
    lambda: f64,
    origin: usize,
) -> Result<GenerationCensus> {
    let threshold = system.check_lambda(lambda)?;
    let lattice = system.lattice();
    let h = system.horizon();
    let rect = SpaceTimeRect::new(lattice.lo().to_vec(), lattice.hi().to_vec(), h.lo, h.hi)?;
    let set = propagate(system, lambda, &SeedSet::point(origin, h.lo), &rect)?;

    let mut order: Vec<(usize, usize)> = (0..set.num_sites())
        .flat_map(|s| (0..set.intervals(s).len()).map(move |i| (s, i)))
        .collect();
    order.sort_by(|a, b| {
        set.intervals(a.0)[a.1]
            .start
            .total_cmp(&set.intervals(b.0)[b.1].start)
    });
    let mut gen: Vec<Vec<usize>> = (0..set.num_sites())
        .map(|s| vec![0; set.intervals(s).len()])
        .collect();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); set.num_sites()];
    for (e, &(from, _)) in system.edges().iter().enumerate() {
        out_edges[from].push(e);
    }

    let mut census = GenerationCensus {
        intervals: Vec::new(),
        arrows: Vec::new(),
        total: 0,
    };
    for (site, i) in order {
        let iv = set.intervals(site)[i];
        let g = match iv.origin {
            Origin::Seed { .. } => 0,
            Origin::Arrow { from_site, time } => {
                let p = interval_index(&set, from_site, time)
                    .expect("parent interval covers the arrow");
                gen[from_site][p] + 1
            }
        };
        gen[site][i] = g;
        if census.intervals.len() <= g {
            census.intervals.resize(g + 1, 0);
            census.arrows.resize(g + 1, 0);
        }
        census.intervals[g] += 1;
        census.total += 1;
        let emitted: usize = out_edges[site]
            .iter()
            .map(|&e| {
                system
                    .edge_arrows(e)
                    .iter()
                    .filter(|a| a.mark <= threshold && iv.covers(a.time) && a.time > iv.start)
                    .count()
            })
            .sum();
        census.arrows[g] += emitted as u64;
    }
    Ok(census)
}

/// Pooled ratio `Σ N_{g+1} / Σ N_g` over replicates, compared with `2Ĉdλ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRatio {
    pub generation: usize,
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub se: f64,
    pub bound: f64,
    /// `ratio <= bound + 3 se`.
    pub holds: bool,
}

/// Census over `n` replicate systems and the generation ratios for `g < generations`.
pub fn census_ratios(
    setup: &SurvivalSetup,
    lambda: f64,
    c_hat: f64,
    generations: usize,
    n: u64,
    seed: u64,
) -> Result<(Vec<GenerationCensus>, Vec<GenerationRatio>)> {
    let censuses = run_replicates(n, seed, |_, s| {
        let sys = setup.build(s)?;
        generation_census(&sys, lambda, setup.origin(&sys))
    })?;
    let bound = 2.0 * c_hat * setup.dim as f64 * lambda;
    let mut ratios = Vec::new();
    for g in 0..generations {
        let x: Vec<f64> = censuses.iter().map(|c| c.count(g) as f64).collect();
        let y: Vec<f64> = censuses.iter().map(|c| c.count(g + 1) as f64).collect();
        let sx: f64 = x.iter().sum();
        if sx == 0.0 {
            break;
        }
        let ratio = y.iter().sum::<f64>() / sx;
        let xbar = sx / n as f64;
        let nf = n as f64;
        let var = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - ratio * a).powi(2))
            .sum::<f64>()
            / (nf * nf * xbar * xbar);
        let se = var.sqrt();
        ratios.push(GenerationRatio {
            generation: g,
            ratio,
            se,
            bound,
            holds: ratio <= bound + 3.0 * se,
        });
    }
    Ok((censuses, ratios))
}
