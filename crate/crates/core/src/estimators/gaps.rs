use serde::{Deserialize, Serialize};

use super::estimate::{run_replicates, Estimate};
use super::pr::{estimate_pr, MultiscaleParams};
use crate::error::{Error, Result};
use crate::graphical::StartPolicy;
use crate::reachability::stopping_geometry;
use crate::renewal::InterarrivalLaw;
use crate::rng::{stream_rng, Stream};

/// Whether a timeline started at 0 has no mark in some odd block
/// `[2iB, (2i+1)B)` with `2i + 1 <= max_index`, sampling only as far as needed.
pub fn has_early_odd_gap<R: rand::Rng>(
    law: &InterarrivalLaw,
    block: f64,
    max_index: u64,
    rng: &mut R,
) -> bool {
    let mut next = law.sample(rng);
    let mut i = 0u64;
    while 2 * i < max_index {
        let lo = 2.0 * i as f64 * block;
        while next < lo {
            next += law.sample(rng);
        }
        if next >= lo + block {
            return true;
        }
        i += 1;
    }
    false
}

/// Whether `T_n <= 2^k` for one replicate at scale `n`.
pub fn early_stop(law: &InterarrivalLaw, n: u32, params: &MultiscaleParams, seed: u64) -> bool {
    let (block, sites) = stopping_geometry(n, params.k, params.beta);
    let max_index = 1u64 << params.k;
    (0..sites).any(|x| {
        let mut rng = stream_rng(seed, Stream::Train(x));
        has_early_odd_gap(law, block, max_index, &mut rng)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    /// `(n, frequency of T_n <= 2^k)`.
    pub rows: Vec<(u32, Estimate)>,
    /// Least-squares slope of `log2(frequency)` against `n`, over nonzero rows.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// `ε₀ = α − 1 − β`.
    pub eps0: f64,
    /// No event observed at the largest `n`.
    pub censored: bool,
}

pub fn estimate_gap_prob(
    params: &MultiscaleParams,
    law: &InterarrivalLaw,
    n_values: &[u32],
    nrep: u64,
    seed: u64,
) -> Result<GapScan> {
    params.validate()?;
    law.validate()?;
    let eps0 = params.eps0(law);
    if !(eps0 > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "need tail exponent > 1 + beta, got {} with beta = {}",
            law.tail_exponent(),
            params.beta
        )));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n < params.k) {
        return Err(Error::ParameterDomain(format!(
            "need n >= k = {}, got {n}",
            params.k
        )));
    }
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let flags = run_replicates(nrep, seed, |_, s| Ok(early_stop(law, n, params, s)))?;
        rows.push((n, Estimate::from_flags(&flags, seed)));
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1.mean > 0.0)
        .map(|r| (r.0 as f64, r.1.mean.log2()))
        .collect();
    let fit = if pts.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        crate::stats::ols(&x, &y)
    } else {
        None
    };
    let largest = n_values.iter().copied().max();
    let censored = rows.iter().any(|r| Some(r.0) == largest && r.1.mean == 0.0);
    Ok(GapScan {
        rows,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        eps0,
        censored,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport {
    pub n: u32,
    pub p_n: Estimate,
    pub p_n_minus_k: Estimate,
    pub p_n_minus_k_minus_1: Estimate,
    /// Frequency of `T_n <= 2^k`.
    pub gap: Estimate,
    /// Smallest `C″` with `P̂_n <= gap + C″ (P̂_{n−k−1} ∨ P̂_{n−k})²` at the point estimates.
    pub c2: Option<f64>,
    /// Range of `C″` over the interval endpoints.
    pub c2_lo: Option<f64>,
    pub c2_hi: Option<f64>,
}

fn c2_from(p_n: f64, gap: f64, prev: f64) -> Option<f64> {
    (prev > 0.0).then(|| ((p_n - gap) / (prev * prev)).max(0.0))
}

/// Diagnostic constant of the scale recursion at scale `n`.
pub fn check_recursion(
    params: &MultiscaleParams,
    law: &InterarrivalLaw,
    lambda: f64,
    n: u32,
    policies: &[StartPolicy],
    nrep: u64,
    seed: u64,
) -> Result<RecursionReport> {
    params.validate()?;
    if n <= params.k + 1 {
        return Err(Error::ParameterDomain(format!(
            "need n > k + 1 = {}, got {n}",
            params.k + 1
        )));
    }
    let pr = |r: u32| -> Result<Estimate> {
        Ok(*estimate_pr(params, law, &[lambda], r, policies, nrep, seed)?[0].best())
    };
    let p_n = pr(n)?;
    let p_nk = pr(n - params.k)?;
    let p_nk1 = pr(n - params.k - 1)?;
    let flags = run_replicates(nrep, seed, |_, s| Ok(early_stop(law, n, params, s)))?;
    let gap = Estimate::from_flags(&flags, seed);
    let prev = p_nk.mean.max(p_nk1.mean);
    Ok(RecursionReport {
        n,
        p_n,
        p_n_minus_k: p_nk,
        p_n_minus_k_minus_1: p_nk1,
        gap,
        c2: c2_from(p_n.mean, gap.mean, prev),
        c2_lo: c2_from(p_n.ci_lo, gap.ci_hi, p_nk.ci_hi.max(p_nk1.ci_hi)),
        c2_hi: c2_from(p_n.ci_hi, gap.ci_lo, p_nk.ci_lo.max(p_nk1.ci_lo)),
    })
}
