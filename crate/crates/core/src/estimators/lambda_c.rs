use serde::{Deserialize, Serialize};

use super::estimate::Estimate;
use super::survival::{estimate_survival, SurvivalSetup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeClass {
    /// Whole interval below `θ_lo`.
    Below,
    /// Whole interval above `θ_hi`.
    Above,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub lambda: f64,
    pub estimate: Estimate,
    pub class: ProbeClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketStatus {
    /// Both a subcritical-looking and a supercritical-looking probe were found.
    Resolved,
    /// Already supercritical at `λ = 0`.
    Degenerate,
    /// Some side could not be certified within the probe budget.
    Unresolved,
}

/// Finite-volume bracket of the survival threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaBracket {
    pub lam_lo: Option<f64>,
    pub lam_hi: Option<f64>,
    pub status: BracketStatus,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub probes: Vec<Probe>,
}

impl LambdaBracket {
    /// The bracket, or an error if it is not resolved.
    pub fn require_resolved(&self) -> Result<(f64, f64)> {
        match (self.status, self.lam_lo, self.lam_hi) {
            (BracketStatus::Resolved, Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::BracketNotFound {
                probes: self.probes.len(),
            }),
        }
    }
}

fn classify(e: &Estimate, theta_lo: f64, theta_hi: f64) -> ProbeClass {
    if e.ci_hi < theta_lo {
        ProbeClass::Below
    } else if e.ci_lo > theta_hi {
        ProbeClass::Above
    } else {
        ProbeClass::Ambiguous
    }
}

/// Coupled bisection for the survival threshold on `[0, setup.lambda_max]`.
///
/// Every probe reuses the same `n` replicate systems. The bracket is the
/// largest probe certified below `θ_lo` and the smallest certified above
/// `θ_hi`. Ambiguous probes split the search: later probes bisect the gaps on
/// either side of the ambiguous zone, alternately.
pub fn estimate_lambda_c(
    setup: &SurvivalSetup,
    n: u64,
    theta_lo: f64,
    theta_hi: f64,
    max_probes: usize,
    seed: u64,
) -> Result<LambdaBracket> {
    if !(0.0 <= theta_lo && theta_lo < theta_hi && theta_hi <= 1.0) {
        return Err(Error::Precondition(format!(
            "need 0 <= theta_lo < theta_hi <= 1, got {theta_lo}, {theta_hi}"
        )));
    }
    let mut probes: Vec<Probe> = Vec::new();
    let probe = |lambda: f64, probes: &mut Vec<Probe>| -> Result<ProbeClass> {
        let estimate = estimate_survival(setup, &[lambda], n, seed)?[0];
        let class = classify(&estimate, theta_lo, theta_hi);
        probes.push(Probe {
            lambda,
            estimate,
            class,
        });
        Ok(class)
    };
    let finish = |lo: Option<f64>, hi: Option<f64>, status, probes| LambdaBracket {
        lam_lo: lo,
        lam_hi: hi,
        status,
        theta_lo,
        theta_hi,
        probes,
    };
    if max_probes < 2 {
        return Ok(finish(None, None, BracketStatus::Unresolved, probes));
    }

    let mut lo = None;
    let mut hi = None;
    match probe(0.0, &mut probes)? {
        ProbeClass::Above => return Ok(finish(None, Some(0.0), BracketStatus::Degenerate, probes)),
        ProbeClass::Below => lo = Some(0.0),
        ProbeClass::Ambiguous => {}
    }
    match probe(setup.lambda_max, &mut probes)? {
        ProbeClass::Above => hi = Some(setup.lambda_max),
        _ => {
            let status = BracketStatus::Unresolved;
            return Ok(finish(lo, hi, status, probes));
        }
    }
    // ambiguous zone [amb_lo, amb_hi], empty until the first ambiguous probe
    let mut amb: Option<(f64, f64)> = if lo.is_none() { Some((0.0, 0.0)) } else { None };
    let mut left_turn = true;
    while probes.len() < max_probes {
        let (a, b) = match (amb, lo) {
            (None, Some(l)) => (l, hi.unwrap()),
            (Some((al, ah)), l) => {
                let can_left = l.is_some_and(|l| al - l > 0.0);
                let go_left = can_left && (left_turn || hi.unwrap() - ah <= 0.0);
                left_turn = !left_turn;
                if go_left {
                    (l.unwrap(), al)
                } else {
                    (ah, hi.unwrap())
                }
            }
            (None, None) => unreachable!(),
        };
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            break;
        }
        match probe(mid, &mut probes)? {
            ProbeClass::Below => lo = Some(mid),
            ProbeClass::Above => hi = Some(mid),
            ProbeClass::Ambiguous => {
                amb = Some(match amb {
                    None => (mid, mid),
                    Some((al, ah)) => (al.min(mid), ah.max(mid)),
                })
            }
        }
    }
    let status = if lo.is_some() {
        BracketStatus::Resolved
    } else {
        BracketStatus::Unresolved
    };
    Ok(finish(lo, hi, status, probes))
}
