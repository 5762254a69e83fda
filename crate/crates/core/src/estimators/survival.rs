use serde::{Deserialize, Serialize};

use super::estimate::{run_replicates, Estimate};
use crate::error::{Error, Result};
use crate::graphical::{build_harris, BuildOptions, HarrisSystem, Lattice, Window};
use crate::reachability::survival_time;
use crate::renewal::InterarrivalLaw;

/// Single-origin survival experiment on the cube `[-half_width, half_width]^dim`.
///
/// Each replicate is one system built at `lambda_max` on `[0, cap]`; every
/// probed `λ ≤ lambda_max` thins that same system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurvivalSetup {
    pub law: InterarrivalLaw,
    pub dim: usize,
    pub half_width: i64,
    pub cap: f64,
    pub lambda_max: f64,
    #[serde(default = "default_max_events")]
    pub max_events: f64,
}

fn default_max_events() -> f64 {
    crate::graphical::max_events()
}

impl SurvivalSetup {
    pub fn new(
        law: InterarrivalLaw,
        dim: usize,
        half_width: i64,
        cap: f64,
        lambda_max: f64,
    ) -> Self {
        Self {
            law,
            dim,
            half_width,
            cap,
            lambda_max,
            max_events: default_max_events(),
        }
    }

    pub fn build(&self, seed: u64) -> Result<HarrisSystem> {
        let lattice = Lattice::centered(self.dim, self.half_width)?;
        let opts = BuildOptions {
            max_events: self.max_events,
            ..Default::default()
        };
        build_harris(
            &lattice,
            Window::new(0.0, self.cap)?,
            &self.law,
            self.lambda_max,
            seed,
            &opts,
        )
    }

    pub fn origin(&self, system: &HarrisSystem) -> usize {
        system
            .lattice()
            .index(&vec![0; self.dim])
            .expect("origin inside centered box")
    }

    fn check(&self, lambdas: &[f64]) -> Result<()> {
        self.law.validate()?;
        if self.dim == 0 || self.half_width < 0 || !(self.cap > 0.0) {
            return Err(Error::Precondition(
                "need dim >= 1, half_width >= 0 and cap > 0".into(),
            ));
        }
        if let Some(&l) = lambdas
            .iter()
            .find(|&&l| !(0.0..=self.lambda_max).contains(&l))
        {
            return Err(Error::OutOfCouplingRange {
                lambda: l,
                lambda_max: self.lambda_max,
            });
        }
        Ok(())
    }
}

/// Per replicate, whether the process from the origin is alive at the cap, for each `λ`.
pub fn survival_flags(
    setup: &SurvivalSetup,
    lambdas: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<Vec<bool>>> {
    setup.check(lambdas)?;
    run_replicates(n, seed, |_, s| {
        let sys = setup.build(s)?;
        let origin = setup.origin(&sys);
        lambdas
            .iter()
            .map(|&l| Ok(survival_time(&sys, l, origin, setup.cap)?.is_censored()))
            .collect()
    })
}

/// Survival-past-cap frequency at each `λ`, with common replicates across `λ`.
pub fn estimate_survival(
    setup: &SurvivalSetup,
    lambdas: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let flags = survival_flags(setup, lambdas, n, seed)?;
    Ok((0..lambdas.len())
        .map(|j| {
            let k = flags.iter().filter(|f| f[j]).count() as u64;
            Estimate::proportion(k, n, seed)
        })
        .collect())
}
