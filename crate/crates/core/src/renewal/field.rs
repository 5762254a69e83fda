use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::mix;

/// Width of the time cells the field is generated in.
pub const CELL_WIDTH: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Seeded {
        seed: u64,
        site: u64,
    },
    /// Explicit points `(time, height)`.
    Explicit(Vec<(f64, f64)>),
}

/// Lazily realized unit-rate Poisson point process on `R × (0, u_cap)`.
///
/// The plane is cut into time cells `[j, j + 1)` (absolute coordinates) and
/// dyadic height bands `(0, 1), [1, 2), [2, 4), ...` below `u_cap`; the points
/// of each (cell, band) box are drawn from an RNG keyed by
/// `(seed, site, cell, band)`. Any two constructions that query the same
/// field therefore see bit-identical points.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardField {
    source: Source,
    u_cap: f64,
}

impl HazardField {
    pub fn new(seed: u64, site: u64, u_cap: f64) -> Result<Self> {
        if !(u_cap > 0.0 && u_cap.is_finite()) {
            return Err(Error::Precondition(format!(
                "u_cap must be positive, got {u_cap}"
            )));
        }
        Ok(Self {
            source: Source::Seeded { seed, site },
            u_cap,
        })
    }

    /// A field holding exactly the given `(time, height)` points.
    pub fn from_points(mut points: Vec<(f64, f64)>, u_cap: f64) -> Self {
        points.retain(|&(_, u)| u > 0.0 && u < u_cap);
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            source: Source::Explicit(points),
            u_cap,
        }
    }

    pub fn u_cap(&self) -> f64 {
        self.u_cap
    }

    fn band(j: u32) -> (f64, f64) {
        if j == 0 {
            (0.0, 1.0)
        } else {
            let lo = ((j - 1) as f64).exp2();
            (lo, 2.0 * lo)
        }
    }

    /// Visit the points of cell `cell` with height `<= max_u` (and possibly some above it).
    pub fn for_each_point_in_cell(&self, cell: i64, max_u: f64, mut f: impl FnMut(f64, f64)) {
        let lo = cell as f64 * CELL_WIDTH;
        let hi = lo + CELL_WIDTH;
        match &self.source {
            Source::Explicit(points) => {
                let a = points.partition_point(|p| p.0 < lo);
                for &(t, u) in points[a..].iter().take_while(|p| p.0 < hi) {
                    if u <= max_u {
                        f(t, u);
                    }
                }
            }
            Source::Seeded { seed, site } => {
                let mut j = 0u32;
                loop {
                    let (b_lo, b_hi) = Self::band(j);
                    if b_lo > max_u || b_lo >= self.u_cap {
                        break;
                    }
                    let b_hi = b_hi.min(self.u_cap);
                    let height = b_hi - b_lo;
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(mix(&[*seed, *site, cell as u64, j as u64]));
                    let mean = CELL_WIDTH * height;
                    let n = Poisson::new(mean)
                        .map(|p| p.sample(&mut rng) as u64)
                        .unwrap_or(0);
                    for _ in 0..n {
                        let t = lo + CELL_WIDTH * rng.random::<f64>();
                        let u = b_lo + height * rng.random::<f64>();
                        f(t, u);
                    }
                    j += 1;
                }
            }
        }
    }

    /// Smallest time `t` in `(after, until]` of a field point `(t, u)` with
    /// `u <= ceiling(t)`, where `ceiling` is nonincreasing on that range.
    pub fn first_point_under(
        &self,
        after: f64,
        until: f64,
        ceiling: impl Fn(f64) -> f64,
    ) -> Result<Option<f64>> {
        if !(after < until) {
            return Ok(None);
        }
        let mut cell = (after / CELL_WIDTH).floor() as i64;
        loop {
            let lo = cell as f64 * CELL_WIDTH;
            if lo > until {
                return Ok(None);
            }
            let top = ceiling(lo.max(after));
            if top > self.u_cap {
                return Err(Error::HazardExceedsCap {
                    hazard: top,
                    u_cap: self.u_cap,
                });
            }
            let mut best: Option<f64> = None;
            if top > 0.0 {
                self.for_each_point_in_cell(cell, top, |t, u| {
                    if t > after && t <= until && u <= ceiling(t) && best.is_none_or(|b| t < b) {
                        best = Some(t);
                    }
                });
            }
            if best.is_some() {
                return Ok(best);
            }
            cell += 1;
        }
    }

    /// Auxiliary uniform in (0, 1) attached to time `t`, for the inverse-CDF head
    /// of an interarrival started at `t`.
    pub fn aux_uniform(&self, t: f64) -> f64 {
        let key = match &self.source {
            Source::Seeded { seed, site } => mix(&[*seed, *site, u64::MAX, t.to_bits()]),
            Source::Explicit(_) => mix(&[u64::MAX, t.to_bits()]),
        };
        super::law::open_unit(&mut ChaCha8Rng::seed_from_u64(key))
    }
}
