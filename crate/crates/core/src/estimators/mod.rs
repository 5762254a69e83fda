//! Monte Carlo estimators and one-sided statistical checks.

mod branching;
mod estimate;
mod fkg;
mod gaps;
mod lambda_c;
mod pr;
mod survival;

pub use branching::{
    branching_bound, census_ratios, generation_census, BranchingBound, GenerationCensus,
    GenerationRatio,
};
pub use estimate::{run_replicates, Difference, Estimate};
pub use fkg::{
    chain_horizon, check_build_chain, check_fkg, BuildChainReport, EventSetup, EventSpec, FkgReport,
};
pub use gaps::{
    check_recursion, early_stop, estimate_gap_prob, has_early_odd_gap, GapScan, RecursionReport,
};
pub use lambda_c::{estimate_lambda_c, BracketStatus, LambdaBracket, Probe, ProbeClass};
pub use pr::{
    crossing_flags, estimate_pr, standard_policies, MultiscaleParams, PolicyEstimate, PrEstimate,
};
pub use survival::{estimate_survival, survival_flags, SurvivalSetup};

#[cfg(test)]
mod tests;
