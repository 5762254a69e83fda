use serde::{Deserialize, Serialize};

use super::estimate::{run_replicates, Estimate};
use crate::error::{Error, Result};
use crate::graphical::{build_harris, BuildOptions, Lattice, StartPolicy, Window};
use crate::reachability::{has_spatial_crossing, has_temporal_crossing, SpaceTimeRect};
use crate::renewal::InterarrivalLaw;

/// Scale parameters of the multiscale rectangles `[0, ⌊2^{rβ}⌋] × [0, 2^r]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiscaleParams {
    pub beta: f64,
    /// Block exponent: blocks of length `2^{n−k}`.
    #[serde(default = "default_k")]
    pub k: u32,
}

fn default_k() -> u32 {
    3
}

impl MultiscaleParams {
    pub fn new(beta: f64, k: u32) -> Self {
        Self { beta, k }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "need 0 < beta < 1, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Spatial extent `⌊2^{rβ}⌋` at scale `r`.
    pub fn width(&self, r: u32) -> i64 {
        2f64.powf(r as f64 * self.beta).floor() as i64
    }

    /// `ε₀ = α − 1 − β` for a law with tail exponent `α`.
    pub fn eps0(&self, law: &InterarrivalLaw) -> f64 {
        law.tail_exponent() - 1.0 - self.beta
    }
}

/// All-at-zero plus uniform offsets of width `2^{r−2}`, `2^{r−1}` and `2^r`.
pub fn standard_policies(r: u32) -> Vec<StartPolicy> {
    let mut out = vec![StartPolicy::AllAtZero];
    for shift in [-2i32, -1, 0] {
        out.push(StartPolicy::UniformOffset {
            width: 2f64.powi(r as i32 + shift),
        });
    }
    out
}

/// Per replicate and `λ`: spatial or temporal crossing of the scale-`r` rectangle.
///
/// Systems are built at `max(lambdas)` so the indicators are coupled across `λ`.
pub fn crossing_flags(
    params: &MultiscaleParams,
    law: &InterarrivalLaw,
    lambdas: &[f64],
    r: u32,
    policy: &StartPolicy,
    n: u64,
    seed: u64,
) -> Result<Vec<Vec<bool>>> {
    params.validate()?;
    let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);
    let width = params.width(r);
    let top = 2f64.powi(r as i32);
    let lattice = Lattice::line(0, width)?;
    let rect = SpaceTimeRect::interval(0, width, 0.0, top)?;
    let opts = BuildOptions {
        start_policy: policy.clone(),
        ..Default::default()
    };
    run_replicates(n, seed, |_, s| {
        let sys = build_harris(&lattice, Window::new(0.0, top)?, law, lambda_max, s, &opts)?;
        lambdas
            .iter()
            .map(|&l| {
                Ok(has_temporal_crossing(&sys, l, &rect)? || has_spatial_crossing(&sys, l, &rect)?)
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEstimate {
    pub policy: String,
    pub estimate: Estimate,
}

/// Crossing probability at one scale: one estimate per start policy and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrEstimate {
    pub r: u32,
    pub lambda: f64,
    pub width: i64,
    pub per_policy: Vec<PolicyEstimate>,
    /// Index into `per_policy` of the largest point estimate.
    pub best: usize,
}

impl PrEstimate {
    pub fn best(&self) -> &Estimate {
        &self.per_policy[self.best].estimate
    }
}

/// `P̂_r` at each `λ`, maximized over `policies` (the standard set if empty).
pub fn estimate_pr(
    params: &MultiscaleParams,
    law: &InterarrivalLaw,
    lambdas: &[f64],
    r: u32,
    policies: &[StartPolicy],
    n: u64,
    seed: u64,
) -> Result<Vec<PrEstimate>> {
    let policies = if policies.is_empty() {
        standard_policies(r)
    } else {
        policies.to_vec()
    };
    let mut per_lambda: Vec<Vec<PolicyEstimate>> = vec![Vec::new(); lambdas.len()];
    for policy in &policies {
        let flags = crossing_flags(params, law, lambdas, r, policy, n, seed)?;
        for (j, slot) in per_lambda.iter_mut().enumerate() {
            let k = flags.iter().filter(|f| f[j]).count() as u64;
            slot.push(PolicyEstimate {
                policy: policy.label(),
                estimate: Estimate::proportion(k, n, seed),
            });
        }
    }
    Ok(per_lambda
        .into_iter()
        .zip(lambdas)
        .map(|(per_policy, &lambda)| {
            let best = (0..per_policy.len()).fold(0, |b, i| {
                if per_policy[i].estimate.mean > per_policy[b].estimate.mean {
                    i
                } else {
                    b
                }
            });
            PrEstimate {
                r,
                lambda,
                width: params.width(r),
                per_policy,
                best,
            }
        })
        .collect())
}
