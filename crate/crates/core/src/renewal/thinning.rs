use super::field::HazardField;
use super::law::InterarrivalLaw;
use super::train::RenewalTrain;
use crate::error::{Error, Result};

/// Length of the inverse-CDF head used when the hazard blows up at zero.
pub const DEFAULT_EPS_H: f64 = 1e-6;

/// Field ceiling that covers the hazard of `law` beyond the inverse-CDF head.
pub fn required_u_cap(law: &InterarrivalLaw, eps_h: f64) -> f64 {
    let age = if law.hazard_unbounded_at_zero() {
        eps_h
    } else {
        0.0
    };
    // small headroom so the cap is never hit exactly
    law.hazard(age).unwrap_or(f64::INFINITY) * (1.0 + 1e-9)
}

fn require_hypothesis_a(law: &InterarrivalLaw) -> Result<()> {
    if law.satisfies_hypothesis_a() {
        Ok(())
    } else {
        Err(Error::NotDecreasingHazard(law.name()))
    }
}

/// Renewal train built from the field points lying under the graph of the
/// hazard, restarted at each accepted mark.
///
/// For laws whose hazard is unbounded at zero, each interarrival first draws
/// an auxiliary uniform: with probability `F(eps_h)` the interarrival is
/// taken from the inverse CDF on `[0, eps_h]`, otherwise the search for the
/// next field point starts `eps_h` after the previous mark.
pub fn sample_train_by_thinning(
    law: &InterarrivalLaw,
    start: f64,
    horizon: f64,
    field: &HazardField,
    eps_h: f64,
) -> Result<RenewalTrain> {
    require_hypothesis_a(law)?;
    if !(start <= horizon) {
        return Err(Error::InvalidWindow {
            lo: start,
            hi: horizon,
        });
    }
    let hybrid = law.hazard_unbounded_at_zero();
    let min_age = if hybrid { eps_h } else { 0.0 };
    let mut marks = Vec::new();
    let mut prev = start;
    loop {
        let mut search_from = prev;
        if hybrid {
            let u = field.aux_uniform(prev);
            if u < law.cdf(eps_h) {
                let t = prev + law.quantile(u);
                if t > horizon {
                    break;
                }
                if t <= prev {
                    return Err(Error::Tie(t));
                }
                marks.push(t);
                prev = t;
                continue;
            }
            search_from = prev + eps_h;
        }
        let origin = prev;
        let next = field.first_point_under(search_from, horizon, |t| {
            law.hazard((t - origin).max(min_age)).unwrap_or(0.0)
        })?;
        match next {
            Some(t) => {
                marks.push(t);
                prev = t;
            }
            None => break,
        }
    }
    RenewalTrain::from_marks(start, horizon, marks)
}

/// Two trains started at `t0 <= t0_prime`, thinned against the same field.
///
/// Under a nonincreasing hazard the marks of the first train that fall in
/// `[t0_prime, ∞)` are a subset of the marks of the second.
pub fn coupled_trains(
    law: &InterarrivalLaw,
    t0: f64,
    t0_prime: f64,
    horizon: f64,
    field: &HazardField,
    eps_h: f64,
) -> Result<(RenewalTrain, RenewalTrain)> {
    require_hypothesis_a(law)?;
    if !(t0 <= t0_prime) {
        return Err(Error::Precondition(format!(
            "coupled_trains needs t0 <= t0', got {t0} > {t0_prime}"
        )));
    }
    let a = sample_train_by_thinning(law, t0, horizon, field, eps_h)?;
    let b = sample_train_by_thinning(law, t0_prime, horizon, field, eps_h)?;
    Ok((a, b))
}

/// Whether the marks of `earlier` in `[from, ∞)` all appear in `later`.
pub fn marks_contained(earlier: &RenewalTrain, later: &RenewalTrain, from: f64) -> bool {
    earlier
        .marks()
        .iter()
        .filter(|&&m| m >= from)
        .all(|&m| later.is_mark(m))
}
