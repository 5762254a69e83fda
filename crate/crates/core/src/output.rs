//! CSV tables for estimator results.
//!
//! Every table starts with one comment line `# key=value,...` carrying
//! provenance, then a header row. Floats use the shortest representation that
//! round-trips, so equal results give byte-identical files.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    BranchingBound, BuildChainReport, Difference, Estimate, FkgReport, GapScan, GenerationRatio,
    LambdaBracket, PrEstimate, RecursionReport,
};
use crate::graphical::HarrisSystem;

/// Serialize `rows` as CSV under a `# provenance` line.
pub fn to_csv<T: Serialize>(provenance: &str, rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Output(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
    let mut out = format!("# {provenance}\n");
    out.push_str(std::str::from_utf8(&body).map_err(|e| Error::Output(e.to_string()))?);
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct SurvivalRow {
    pub lambda: f64,
    pub estimate: f64,
    pub n: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

pub fn survival_rows(lambdas: &[f64], est: &[Estimate]) -> Vec<SurvivalRow> {
    lambdas
        .iter()
        .zip(est)
        .map(|(&lambda, e)| SurvivalRow {
            lambda,
            estimate: e.mean,
            n: e.n,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            seed: e.seed,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct PrRow {
    pub r: u32,
    pub lambda: f64,
    pub width: i64,
    pub policy: String,
    pub estimate: f64,
    pub n: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub best: bool,
    pub seed: u64,
}

pub fn pr_rows(scans: &[PrEstimate]) -> Vec<PrRow> {
    scans
        .iter()
        .flat_map(|p| {
            p.per_policy.iter().enumerate().map(move |(i, q)| PrRow {
                r: p.r,
                lambda: p.lambda,
                width: p.width,
                policy: q.policy.clone(),
                estimate: q.estimate.mean,
                n: q.estimate.n,
                ci_lo: q.estimate.ci_lo,
                ci_hi: q.estimate.ci_hi,
                best: i == p.best,
                seed: q.estimate.seed,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct GapRow {
    pub n: u32,
    pub frequency: f64,
    pub nrep: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

pub fn gap_rows(scan: &GapScan) -> Vec<GapRow> {
    scan.rows
        .iter()
        .map(|(n, e)| GapRow {
            n: *n,
            frequency: e.mean,
            nrep: e.n,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            seed: e.seed,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ProbeRow {
    pub probe: usize,
    pub lambda: f64,
    pub estimate: f64,
    pub n: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub class: String,
}

pub fn probe_rows(b: &LambdaBracket) -> Vec<ProbeRow> {
    b.probes
        .iter()
        .enumerate()
        .map(|(i, p)| ProbeRow {
            probe: i,
            lambda: p.lambda,
            estimate: p.estimate.mean,
            n: p.estimate.n,
            ci_lo: p.estimate.ci_lo,
            ci_hi: p.estimate.ci_hi,
            class: serde_json::to_value(p.class)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BranchingRow {
    pub t: f64,
    pub mean_length: f64,
    pub n: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub is_max: bool,
}

pub fn branching_rows(b: &BranchingBound) -> Vec<BranchingRow> {
    b.per_t
        .iter()
        .map(|(t, e)| BranchingRow {
            t: *t,
            mean_length: e.mean,
            n: e.n,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            is_max: *t == b.t_star,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct CensusRow {
    pub generation: usize,
    pub ratio: f64,
    pub se: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn census_rows(ratios: &[GenerationRatio]) -> Vec<CensusRow> {
    ratios
        .iter()
        .map(|r| CensusRow {
            generation: r.generation,
            ratio: r.ratio,
            se: r.se,
            bound: r.bound,
            holds: r.holds,
        })
        .collect()
}

/// One named quantity with an interval; `violated` is empty for plain estimates.
#[derive(Debug, Serialize)]
pub struct QuantityRow {
    pub quantity: String,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub violated: String,
}

impl QuantityRow {
    pub fn estimate(name: impl Into<String>, e: &Estimate) -> Self {
        Self {
            quantity: name.into(),
            value: e.mean,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            violated: String::new(),
        }
    }

    pub fn difference(name: impl Into<String>, d: &Difference) -> Self {
        Self {
            quantity: name.into(),
            value: d.value,
            ci_lo: d.ci_lo,
            ci_hi: d.ci_hi,
            violated: d.violated().to_string(),
        }
    }
}

pub fn fkg_rows(r: &FkgReport) -> Vec<QuantityRow> {
    vec![
        QuantityRow::estimate("p_a", &r.p_a),
        QuantityRow::estimate("p_b", &r.p_b),
        QuantityRow::estimate("p_ab", &r.p_ab),
        QuantityRow::difference("p_ab_minus_p_a_p_b", &r.covariance),
    ]
}

pub fn build_chain_rows(r: &BuildChainReport) -> Vec<QuantityRow> {
    let mut rows: Vec<QuantityRow> = r
        .p_each
        .iter()
        .enumerate()
        .map(|(j, e)| QuantityRow::estimate(format!("p_a{j}"), e))
        .collect();
    rows.push(QuantityRow::estimate("p_all", &r.p_all));
    rows.push(QuantityRow::difference(
        "p_all_minus_product",
        &r.vs_product,
    ));
    rows.push(QuantityRow::difference(
        "p_all_minus_p_a0_power",
        &r.vs_power,
    ));
    if let (Some(pt), Some(d)) = (&r.p_temporal, &r.vs_corollary) {
        rows.push(QuantityRow::estimate("p_temporal", pt));
        rows.push(QuantityRow::difference("p_temporal_minus_p_a0_power", d));
    }
    rows
}

pub fn recursion_rows(r: &RecursionReport) -> Vec<QuantityRow> {
    let nan = f64::NAN;
    vec![
        QuantityRow::estimate("p_n", &r.p_n),
        QuantityRow::estimate("p_n_minus_k", &r.p_n_minus_k),
        QuantityRow::estimate("p_n_minus_k_minus_1", &r.p_n_minus_k_minus_1),
        QuantityRow::estimate("gap", &r.gap),
        QuantityRow {
            quantity: "c2".into(),
            value: r.c2.unwrap_or(nan),
            ci_lo: r.c2_lo.unwrap_or(nan),
            ci_hi: r.c2_hi.unwrap_or(nan),
            violated: String::new(),
        },
    ]
}

#[derive(Debug, Serialize)]
pub struct MarkRow {
    pub site: usize,
    pub mark_time: f64,
}

/// Renewal marks of every site, `(site, mark_time)`.
pub fn mark_rows(system: &HarrisSystem) -> Vec<MarkRow> {
    system
        .trains()
        .iter()
        .enumerate()
        .flat_map(|(site, t)| {
            t.marks()
                .iter()
                .map(move |&mark_time| MarkRow { site, mark_time })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ArrowRow {
    pub from: usize,
    pub to: usize,
    pub time: f64,
    pub mark: f64,
}

pub fn arrow_rows(system: &HarrisSystem) -> Vec<ArrowRow> {
    system
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(e, &(from, to))| {
            system.edge_arrows(e).iter().map(move |a| ArrowRow {
                from,
                to,
                time: a.time,
                mark: a.mark,
            })
        })
        .collect()
}
