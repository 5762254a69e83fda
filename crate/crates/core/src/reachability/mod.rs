//! Infected space-time sets, paths and crossing events.

mod crossing;
mod diagram;
mod gaps;
mod propagate;
mod region;
mod witness;

pub use crossing::{
    detect_a0, detect_chain, diagonal_crossing, has_spatial_crossing, has_temporal_crossing,
    spatial_crossing, survival_time, temporal_crossing, windowed_temporal_crossing, ChainOutcome,
    CrossingOutcome, DiagonalParams, Survival,
};
pub use diagram::{render_svg, PX_PER_SITE, PX_PER_TIME};
pub use gaps::{detect_gap, first_odd_gap, stopping_geometry, stopping_index};
pub use propagate::{propagate, InfectedInterval, InfectedIntervalSet, Origin};
pub use region::{Seed, SeedSet, SpaceTimeRect};
pub use witness::{extract_witness, PathWitness};

#[cfg(test)]
mod tests;
