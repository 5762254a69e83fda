use rand::Rng;
use serde::{Deserialize, Serialize};

use super::law::InterarrivalLaw;
use crate::error::{Error, Result};

/// Renewal marks of one timeline, started at `start` and observed up to `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalTrain {
    pub start: f64,
    pub horizon: f64,
    marks: Vec<f64>,
}

impl RenewalTrain {
    /// Build from explicit marks; they must be strictly increasing and lie in `(start, horizon]`.
    pub fn from_marks(start: f64, horizon: f64, marks: Vec<f64>) -> Result<Self> {
        if !(start <= horizon) {
            return Err(Error::InvalidWindow {
                lo: start,
                hi: horizon,
            });
        }
        let mut prev = start;
        for &m in &marks {
            if m == prev {
                return Err(Error::Tie(m));
            }
            if !(m > prev) || m > horizon {
                return Err(Error::Precondition(format!(
                    "marks must be strictly increasing in ({start}, {horizon}], got {m}"
                )));
            }
            prev = m;
        }
        Ok(Self {
            start,
            horizon,
            marks,
        })
    }

    /// An empty train (no marks on the window).
    pub fn empty(start: f64, horizon: f64) -> Self {
        Self {
            start,
            horizon,
            marks: Vec::new(),
        }
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn is_mark(&self, t: f64) -> bool {
        self.marks.binary_search_by(|m| m.total_cmp(&t)).is_ok()
    }

    /// Number of marks `<= t`.
    pub fn count_le(&self, t: f64) -> usize {
        self.marks.partition_point(|&m| m <= t)
    }

    /// First mark strictly after `t`, if observed.
    pub fn next_mark_after(&self, t: f64) -> Option<f64> {
        self.marks.get(self.count_le(t)).copied()
    }

    /// First mark at or after `t`.
    pub fn first_mark_at_or_after(&self, t: f64) -> Option<f64> {
        let i = self.marks.partition_point(|&m| m < t);
        self.marks.get(i).copied()
    }

    /// Last mark at or before `t`.
    pub fn last_mark_at_or_before(&self, t: f64) -> Option<f64> {
        self.count_le(t).checked_sub(1).map(|i| self.marks[i])
    }

    /// Marks inside the closed window `[lo, hi]`.
    pub fn marks_in(&self, lo: f64, hi: f64) -> &[f64] {
        let a = self.marks.partition_point(|&m| m < lo);
        let b = self.marks.partition_point(|&m| m <= hi);
        &self.marks[a..b.max(a)]
    }

    /// Successive interarrival times, the first measured from `start`.
    pub fn interarrivals(&self) -> Vec<f64> {
        let mut prev = self.start;
        self.marks
            .iter()
            .map(|&m| {
                let d = m - prev;
                prev = m;
                d
            })
            .collect()
    }
}

/// Direct sampler: partial sums of i.i.d. interarrivals, kept while they land in `(start, horizon]`.
pub fn sample_train<R: Rng + ?Sized>(
    law: &InterarrivalLaw,
    start: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<RenewalTrain> {
    if !(start <= horizon) {
        return Err(Error::InvalidWindow {
            lo: start,
            hi: horizon,
        });
    }
    let mut marks = Vec::new();
    let mut t = start;
    if horizon > start {
        loop {
            let next = t + law.sample(rng);
            if next > horizon {
                break;
            }
            if next <= t {
                return Err(Error::Tie(next));
            }
            marks.push(next);
            t = next;
        }
    }
    Ok(RenewalTrain {
        start,
        horizon,
        marks,
    })
}
