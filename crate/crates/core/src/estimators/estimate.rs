use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::replicate_seed;
use crate::stats::{t_interval, wilson, Z95};

/// Monte Carlo estimate with a 95% interval.
///
/// Proportions use the Wilson score interval, means the Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub n: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Master seed the replicates were derived from.
    pub seed: u64,
}

impl Estimate {
    pub fn proportion(successes: u64, n: u64, seed: u64) -> Self {
        let mean = if n == 0 {
            0.0
        } else {
            successes as f64 / n as f64
        };
        let (ci_lo, ci_hi) = wilson(successes, n, Z95);
        Self {
            mean,
            n,
            ci_lo,
            ci_hi,
            seed,
        }
    }

    pub fn from_flags(flags: &[bool], seed: u64) -> Self {
        Self::proportion(
            flags.iter().filter(|&&b| b).count() as u64,
            flags.len() as u64,
            seed,
        )
    }

    pub fn from_samples(xs: &[f64], seed: u64) -> Self {
        let (mean, ci_lo, ci_hi, _) = t_interval(xs);
        Self {
            mean,
            n: xs.len() as u64,
            ci_lo,
            ci_hi,
            seed,
        }
    }

    pub fn successes(&self) -> u64 {
        (self.mean * self.n as f64).round() as u64
    }
}

/// Difference estimate with a normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Difference {
    pub value: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Difference {
    /// From the point value and per-replicate influence values.
    pub fn from_influence(value: f64, influence: &[f64]) -> Self {
        let n = influence.len() as f64;
        let var = influence.iter().map(|x| x * x).sum::<f64>() / (n * n);
        let se = var.sqrt();
        Self {
            value,
            se,
            ci_lo: value - Z95 * se,
            ci_hi: value + Z95 * se,
        }
    }

    /// One-sided check of `value >= 0`: violated only if the whole interval is negative.
    pub fn violated(&self) -> bool {
        self.ci_hi < 0.0
    }
}

/// Run `n` replicates, replicate `i` getting seed `replicate_seed(master, i)`.
///
/// Results come back in replicate order whatever the thread count.
pub fn run_replicates<T, F>(n: u64, master: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(i, replicate_seed(master, i)))
        .collect()
}
