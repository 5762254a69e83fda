//! Interarrival laws, renewal trains and hazard-rate thinning.

mod field;
mod law;
mod thinning;
mod train;

pub use field::{HazardField, CELL_WIDTH};
pub(crate) use law::open_unit;
pub use law::InterarrivalLaw;
pub use thinning::{
    coupled_trains, marks_contained, required_u_cap, sample_train_by_thinning, DEFAULT_EPS_H,
};
pub use train::{sample_train, RenewalTrain};

/// Hazard rate of `law` at age `t`.
pub fn hazard(law: &InterarrivalLaw, t: f64) -> crate::Result<f64> {
    law.hazard(t)
}
