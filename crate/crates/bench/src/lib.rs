//! Benchmark fixtures shared by the criterion benches.

use rcp_core::graphical::{build_harris, BuildOptions, HarrisSystem, Lattice, StartPolicy, Window};
use rcp_core::renewal::InterarrivalLaw;

pub const PARETO: InterarrivalLaw = InterarrivalLaw::ShiftedPareto {
    alpha: 1.5,
    scale: 1.0,
};

/// Line `[-half, half]` on `[0, horizon]` at `lambda_max = 1`, uniform offsets of width 8.
pub fn line_system(half: i64, horizon: f64, seed: u64) -> HarrisSystem {
    let opts = BuildOptions {
        start_policy: StartPolicy::UniformOffset { width: 8.0 },
        ..Default::default()
    };
    build_harris(
        &Lattice::line(-half, half).unwrap(),
        Window::new(0.0, horizon).unwrap(),
        &PARETO,
        1.0,
        seed,
        &opts,
    )
    .unwrap()
}
