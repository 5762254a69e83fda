//! Renewal contact process: Harris systems with renewal recovery marks,
//! interval propagation, crossing detectors and Monte Carlo estimators.
//!
//! - [`renewal`]: interarrival laws, renewal trains, hazard-field thinning.
//! - [`graphical`]: lattice boxes and frozen Harris systems, coupled across `λ`.
//! - [`reachability`]: infected intervals, crossings, gaps, SVG diagrams.
//! - [`estimators`]: replicated estimates with intervals.
//! - [`output`]: CSV tables.

pub mod error;
pub mod estimators;
pub mod graphical;
pub mod output;
pub mod reachability;
pub mod renewal;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
