use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interarrival distribution of the recovery marks.
///
/// Serialized as `{"kind": "shifted_pareto", "alpha": 1.5, "scale": 1.0}` etc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterarrivalLaw {
    Exponential {
        rate: f64,
    },
    /// `F(t) = 1 - (scale / (scale + t))^alpha`.
    ShiftedPareto {
        alpha: f64,
        scale: f64,
    },
    /// `F(t) = 1 - exp(-(t / scale)^shape)`.
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Uniform on `[0, b]`.
    Uniform {
        b: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl InterarrivalLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { rate } => positive("rate", rate),
            Self::ShiftedPareto { alpha, scale } => {
                positive("alpha", alpha)?;
                positive("scale", scale)
            }
            Self::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            Self::Uniform { b } => positive("b", b),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Exponential { rate } => format!("exponential(rate={rate})"),
            Self::ShiftedPareto { alpha, scale } => {
                format!("shifted_pareto(alpha={alpha},scale={scale})")
            }
            Self::Weibull { shape, scale } => format!("weibull(shape={shape},scale={scale})"),
            Self::Uniform { b } => format!("uniform(b={b})"),
        }
    }

    /// Survivor function `1 - F(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::ShiftedPareto { alpha, scale } => (scale / (scale + t)).powf(alpha),
            Self::Weibull { shape, scale } => (-(t / scale).powf(shape)).exp(),
            Self::Uniform { b } => {
                if t >= b {
                    0.0
                } else {
                    1.0 - t / b
                }
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::ShiftedPareto { alpha, scale } => {
                alpha / scale * (scale / (scale + t)).powf(alpha + 1.0)
            }
            Self::Weibull { shape, scale } => {
                let z = t / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
            Self::Uniform { b } => {
                if t <= b {
                    1.0 / b
                } else {
                    0.0
                }
            }
        }
    }

    /// Hazard rate `f(t) / (1 - F(t))` in closed form.
    ///
    /// Weibull with shape < 1 returns `+inf` at `t = 0`.
    pub fn hazard(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Precondition(format!("hazard needs t >= 0, got {t}")));
        }
        Ok(match *self {
            Self::Exponential { rate } => rate,
            Self::ShiftedPareto { alpha, scale } => alpha / (scale + t),
            Self::Weibull { shape, scale } => shape / scale * (t / scale).powf(shape - 1.0),
            Self::Uniform { b } => {
                if t >= b {
                    return Err(Error::HazardUndefined { t });
                }
                1.0 / (b - t)
            }
        })
    }

    /// Nonincreasing hazard rate (decreasing-hazard hypothesis), exact per variant.
    pub fn satisfies_hypothesis_a(&self) -> bool {
        match *self {
            Self::Exponential { .. } | Self::ShiftedPareto { .. } => true,
            Self::Weibull { shape, .. } => shape <= 1.0,
            Self::Uniform { .. } => false,
        }
    }

    /// Whether `∫ t^p dμ < ∞`.
    pub fn has_finite_moment(&self, p: f64) -> bool {
        match *self {
            Self::ShiftedPareto { alpha, .. } => p < alpha,
            _ => true,
        }
    }

    /// Tail exponent of the survivor function (`+inf` for light tails).
    pub fn tail_exponent(&self) -> f64 {
        match *self {
            Self::ShiftedPareto { alpha, .. } => alpha,
            _ => f64::INFINITY,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::ShiftedPareto { alpha, scale } => {
                if alpha > 1.0 {
                    scale / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::Weibull { shape, scale } => {
                scale * statrs::function::gamma::gamma(1.0 + 1.0 / shape)
            }
            Self::Uniform { b } => b / 2.0,
        }
    }

    /// Hazard unbounded near zero, so thinning needs the inverse-CDF head.
    pub fn hazard_unbounded_at_zero(&self) -> bool {
        matches!(*self, Self::Weibull { shape, .. } if shape < 1.0)
    }

    /// Inverse of the survivor function: the `t` with `1 - F(t) = s`, `s ∈ (0, 1]`.
    pub fn inverse_survival(&self, s: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -s.ln() / rate,
            Self::ShiftedPareto { alpha, scale } => {
                let g = if alpha == 2.0 {
                    1.0 / s.sqrt()
                } else {
                    s.powf(-1.0 / alpha)
                };
                scale * (g - 1.0)
            }
            Self::Weibull { shape, scale } => scale * (-s.ln()).powf(1.0 / shape),
            Self::Uniform { b } => b * (1.0 - s),
        }
    }

    /// Inverse CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        self.inverse_survival(1.0 - p)
    }

    /// One interarrival by survivor inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_survival(open_unit(rng))
    }
}

/// Uniform on the open interval (0, 1).
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
