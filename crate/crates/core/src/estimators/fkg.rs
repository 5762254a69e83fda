use serde::{Deserialize, Serialize};

use super::estimate::{run_replicates, Difference, Estimate};
use crate::error::{Error, Result};
use crate::graphical::{build_harris, BuildOptions, HarrisSystem, Lattice, Window};
use crate::reachability::{
    diagonal_crossing, has_spatial_crossing, has_temporal_crossing, DiagonalParams, SpaceTimeRect,
};
use crate::renewal::InterarrivalLaw;

/// Increasing events from the detector catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSpec {
    /// Member `A_j` of the diagonal chain.
    Chain {
        params: DiagonalParams,
        j: usize,
    },
    Temporal {
        rect: SpaceTimeRect,
    },
    Spatial {
        rect: SpaceTimeRect,
    },
    /// No renewal mark of `site` in `[lo, hi]`.
    MarkFree {
        site: usize,
        lo: f64,
        hi: f64,
    },
}

impl EventSpec {
    pub fn occurs(&self, system: &HarrisSystem, lambda: f64) -> Result<bool> {
        match self {
            EventSpec::Chain { params, j } => {
                Ok(diagonal_crossing(system, lambda, params, *j)?.crossed())
            }
            EventSpec::Temporal { rect } => has_temporal_crossing(system, lambda, rect),
            EventSpec::Spatial { rect } => has_spatial_crossing(system, lambda, rect),
            EventSpec::MarkFree { site, lo, hi } => {
                if *site >= system.lattice().num_sites() {
                    return Err(Error::Precondition(format!(
                        "site {site} outside the lattice"
                    )));
                }
                Ok(system.train(*site).marks_in(*lo, *hi).is_empty())
            }
        }
    }
}

/// Geometry shared by all replicates of a correlation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSetup {
    pub law: InterarrivalLaw,
    pub lattice: Lattice,
    pub horizon: Window,
}

impl EventSetup {
    fn build(&self, lambda: f64, seed: u64) -> Result<HarrisSystem> {
        build_harris(
            &self.lattice,
            self.horizon,
            &self.law,
            lambda,
            seed,
            &BuildOptions::default(),
        )
    }

    fn check_law(&self) -> Result<()> {
        self.law.validate()?;
        if !self.law.satisfies_hypothesis_a() {
            return Err(Error::NotDecreasingHazard(self.law.name()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub p_a: Estimate,
    pub p_b: Estimate,
    pub p_ab: Estimate,
    /// `P(A∩B) − P(A)P(B)`.
    pub covariance: Difference,
    pub violation: bool,
}

fn mean(xs: &[bool]) -> f64 {
    xs.iter().filter(|&&b| b).count() as f64 / xs.len() as f64
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Estimate `P(A∩B) − P(A)P(B)` and flag a violation only if its whole interval is negative.
pub fn check_fkg(
    setup: &EventSetup,
    lambda: f64,
    a: &EventSpec,
    b: &EventSpec,
    n: u64,
    seed: u64,
) -> Result<FkgReport> {
    setup.check_law()?;
    let pairs = run_replicates(n, seed, |_, s| {
        let sys = setup.build(lambda, s)?;
        Ok((a.occurs(&sys, lambda)?, b.occurs(&sys, lambda)?))
    })?;
    let fa: Vec<bool> = pairs.iter().map(|p| p.0).collect();
    let fb: Vec<bool> = pairs.iter().map(|p| p.1).collect();
    let fab: Vec<bool> = pairs.iter().map(|p| p.0 && p.1).collect();
    let (pa, pb, pab) = (mean(&fa), mean(&fb), mean(&fab));
    let influence: Vec<f64> = pairs
        .iter()
        .map(|&(x, y)| (ind(x && y) - pab) - pb * (ind(x) - pa) - pa * (ind(y) - pb))
        .collect();
    let covariance = Difference::from_influence(pab - pa * pb, &influence);
    Ok(FkgReport {
        p_a: Estimate::from_flags(&fa, seed),
        p_b: Estimate::from_flags(&fb, seed),
        p_ab: Estimate::from_flags(&fab, seed),
        covariance,
        violation: covariance.violated(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildChainReport {
    pub m: usize,
    /// `P(A_j)` for `j = 0..=m`.
    pub p_each: Vec<Estimate>,
    /// `P(A_0 ∩ … ∩ A_m)`.
    pub p_all: Estimate,
    /// `P(A_0 ∩ … ∩ A_m) − ∏ P(A_j)`.
    pub vs_product: Difference,
    /// `P(A_0 ∩ … ∩ A_m) − P(A_0)^{m+1}`.
    pub vs_power: Difference,
    /// Temporal crossing of `[0, L] × [v + ε, v + ε + mT]`; absent for `m = 0`.
    pub p_temporal: Option<Estimate>,
    /// `P(temporal) − P(A_0)^{8m/3 + 2}`.
    pub vs_corollary: Option<Difference>,
    pub violation: bool,
}

/// Time needed by the chain up to `A_m` and by the long temporal crossing.
pub fn chain_horizon(p: &DiagonalParams, m: usize) -> f64 {
    p.target(m).1.max(p.v + p.eps + m as f64 * p.t)
}

/// Lower bounds on the chain intersection and on the long temporal crossing.
pub fn check_build_chain(
    law: &InterarrivalLaw,
    lambda: f64,
    m: usize,
    p: &DiagonalParams,
    n: u64,
    seed: u64,
) -> Result<BuildChainReport> {
    p.validate()?;
    let setup = EventSetup {
        law: *law,
        lattice: Lattice::line(0, p.l)?,
        horizon: Window::new(p.v.min(0.0), chain_horizon(p, m))?,
    };
    setup.check_law()?;
    let long = if m > 0 {
        Some(SpaceTimeRect::interval(
            0,
            p.l,
            p.v + p.eps,
            p.v + p.eps + m as f64 * p.t,
        )?)
    } else {
        None
    };
    let rows = run_replicates(n, seed, |_, s| {
        let sys = setup.build(lambda, s)?;
        let each = (0..=m)
            .map(|j| Ok(diagonal_crossing(&sys, lambda, p, j)?.crossed()))
            .collect::<Result<Vec<bool>>>()?;
        let temporal = match &long {
            Some(rect) => has_temporal_crossing(&sys, lambda, rect)?,
            None => false,
        };
        Ok((each, temporal))
    })?;

    let nf = n as f64;
    let p_j: Vec<f64> = (0..=m)
        .map(|j| rows.iter().filter(|r| r.0[j]).count() as f64 / nf)
        .collect();
    let all: Vec<bool> = rows.iter().map(|r| r.0.iter().all(|&b| b)).collect();
    let p_all = mean(&all);

    let prod: f64 = p_j.iter().product();
    let infl_prod: Vec<f64> = rows
        .iter()
        .zip(&all)
        .map(|(r, &a)| {
            let mut v = ind(a) - p_all;
            for j in 0..=m {
                let others: f64 = (0..=m).filter(|&i| i != j).map(|i| p_j[i]).product();
                v -= others * (ind(r.0[j]) - p_j[j]);
            }
            v
        })
        .collect();
    let vs_product = Difference::from_influence(p_all - prod, &infl_prod);

    let e = (m + 1) as f64;
    let p0 = p_j[0];
    let infl_pow: Vec<f64> = rows
        .iter()
        .zip(&all)
        .map(|(r, &a)| (ind(a) - p_all) - e * p0.powf(e - 1.0) * (ind(r.0[0]) - p0))
        .collect();
    let vs_power = Difference::from_influence(p_all - p0.powf(e), &infl_pow);

    let (p_temporal, vs_corollary) = if long.is_some() {
        let flags: Vec<bool> = rows.iter().map(|r| r.1).collect();
        let pt = mean(&flags);
        let e = 8.0 * m as f64 / 3.0 + 2.0;
        let infl: Vec<f64> = rows
            .iter()
            .map(|r| (ind(r.1) - pt) - e * p0.powf(e - 1.0) * (ind(r.0[0]) - p0))
            .collect();
        (
            Some(Estimate::from_flags(&flags, seed)),
            Some(Difference::from_influence(pt - p0.powf(e), &infl)),
        )
    } else {
        (None, None)
    };
    let violation =
        vs_product.violated() || vs_power.violated() || vs_corollary.is_some_and(|d| d.violated());
    Ok(BuildChainReport {
        m,
        p_each: (0..=m)
            .map(|j| Estimate::from_flags(&rows.iter().map(|r| r.0[j]).collect::<Vec<_>>(), seed))
            .collect(),
        p_all: Estimate::from_flags(&all, seed),
        vs_product,
        vs_power,
        p_temporal,
        vs_corollary,
        violation,
    })
}
