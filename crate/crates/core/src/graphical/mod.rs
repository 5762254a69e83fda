//! Frozen Harris systems on finite boxes and their λ-monotone thinning.

mod dump;
mod lattice;
mod system;

pub use dump::{read_dump, write_dump, DUMP_MAGIC, DUMP_VERSION};
pub use lattice::Lattice;
pub use system::{
    build_harris, expected_events, max_events, parse_max_events, Arrow, BuildOptions, HarrisSystem,
    StartPolicy, Window, DEFAULT_MAX_EVENTS, MAX_EVENTS_ENV,
};
