use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rcp_core::estimators::EventSpec;
use rcp_core::graphical::{Lattice, StartPolicy, Window};
use rcp_core::reachability::{DiagonalParams, SeedSet, SpaceTimeRect};
use rcp_core::renewal::InterarrivalLaw;

pub const DEFAULT_THETA_LO: f64 = 0.01;
pub const DEFAULT_THETA_HI: f64 = 0.2;
pub const DEFAULT_MAX_PROBES: usize = 12;
pub const DEFAULT_GENERATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    Simulate,
    Survival,
    PrScan,
    LambdaC,
    FkgCheck,
    BuildChain,
    GapScan,
    Recursion,
    Census,
    Diagram,
    Replay,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Scale parameters of the multiscale estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scales {
    pub beta: f64,
    #[serde(default = "default_k")]
    pub k: u32,
    /// Scales `r` for `pr-scan`.
    #[serde(default)]
    pub r: Vec<u32>,
    /// Scales `n` for `gap-scan`; the first one is used by `recursion`.
    #[serde(default)]
    pub n_values: Vec<u32>,
}

fn default_k() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventPair {
    pub a: EventSpec,
    pub b: EventSpec,
}

/// Explicit realization: renewal marks per site and arrows `[from, to, time, mark]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandSystem {
    pub marks: Vec<Vec<f64>>,
    #[serde(default)]
    pub arrows: Vec<(usize, usize, f64, f64)>,
}

/// One experiment, read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub law: InterarrivalLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<Op>,
    /// Master seed.
    #[serde(default)]
    pub seed: u64,
    /// Replicate count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Lattice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Window>,
    /// Centered box `[-half_width, half_width]^dim` for the survival family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_policy: Option<StartPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Scales>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<DiagonalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<EventPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    /// Propagation region for `simulate` and `diagram`; the whole box by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<SpaceTimeRect>,
    /// Seeds for `simulate` and `diagram`; the bottom face of the region by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<HandSystem>,
    /// Output directory. Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// A config field that is absent or out of its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.reason)
    }
}

pub type FieldResult<T> = std::result::Result<T, FieldError>;

pub fn field_error(field: &'static str, reason: impl Into<String>) -> FieldError {
    FieldError {
        field,
        reason: reason.into(),
    }
}

fn need<T: Clone>(v: &Option<T>, field: &'static str, op: Op) -> FieldResult<T> {
    v.clone()
        .ok_or_else(|| field_error(field, format!("required by op {op}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    /// SHA-256 of the canonical JSON form, without the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn n(&self, op: Op) -> FieldResult<u64> {
        let n = need(&self.n, "n", op)?;
        if n < 2 {
            return Err(field_error(
                "n",
                format!("need at least 2 replicates, got {n}"),
            ));
        }
        Ok(n)
    }

    pub fn lambda(&self, op: Op) -> FieldResult<f64> {
        let l = need(&self.lambda, "lambda", op)?;
        if !(l >= 0.0 && l.is_finite()) {
            return Err(field_error(
                "lambda",
                format!("must be finite and >= 0, got {l}"),
            ));
        }
        Ok(l)
    }

    /// `lambdas`, or `[lambda]` when only a single rate is given.
    pub fn lambdas(&self, op: Op) -> FieldResult<Vec<f64>> {
        let ls = match (&self.lambdas, self.lambda) {
            (Some(ls), _) => ls.clone(),
            (None, Some(l)) => vec![l],
            (None, None) => return Err(field_error("lambdas", format!("required by op {op}"))),
        };
        if ls.is_empty() {
            return Err(field_error("lambdas", "must not be empty"));
        }
        if let Some(l) = ls.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(field_error(
                "lambdas",
                format!("rates must be finite and >= 0, got {l}"),
            ));
        }
        Ok(ls)
    }

    /// `lambda_max`, defaulting to the largest requested rate.
    pub fn lambda_max(&self, requested: &[f64]) -> FieldResult<f64> {
        let top = requested.iter().copied().fold(0.0, f64::max);
        match self.lambda_max {
            Some(m) if m < top => Err(field_error(
                "lambda_max",
                format!("{m} is below the requested rate {top}"),
            )),
            Some(m) if !(m > 0.0) => {
                Err(field_error("lambda_max", format!("must be > 0, got {m}")))
            }
            Some(m) => Ok(m),
            None if top > 0.0 => Ok(top),
            None => Ok(1.0),
        }
    }

    pub fn lattice(&self, op: Op) -> FieldResult<Lattice> {
        need(&self.lattice, "lattice", op)
    }

    pub fn horizon(&self, op: Op) -> FieldResult<Window> {
        need(&self.horizon, "horizon", op)
    }

    pub fn dim(&self) -> FieldResult<usize> {
        match self.dim.unwrap_or(1) {
            0 => Err(field_error("dim", "must be >= 1")),
            d => Ok(d),
        }
    }

    pub fn half_width(&self, op: Op) -> FieldResult<i64> {
        let h = need(&self.half_width, "half_width", op)?;
        if h < 0 {
            return Err(field_error("half_width", format!("must be >= 0, got {h}")));
        }
        Ok(h)
    }

    pub fn cap(&self, op: Op) -> FieldResult<f64> {
        let c = need(&self.cap, "cap", op)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(field_error(
                "cap",
                format!("must be finite and > 0, got {c}"),
            ));
        }
        Ok(c)
    }

    pub fn scales(&self, op: Op) -> FieldResult<Scales> {
        need(&self.scales, "scales", op)
    }

    pub fn diagonal(&self, op: Op) -> FieldResult<DiagonalParams> {
        need(&self.diagonal, "diagonal", op)
    }

    pub fn m(&self, op: Op) -> FieldResult<usize> {
        need(&self.m, "m", op)
    }

    pub fn events(&self, op: Op) -> FieldResult<EventPair> {
        need(&self.events, "events", op)
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (
            self.theta_lo.unwrap_or(DEFAULT_THETA_LO),
            self.theta_hi.unwrap_or(DEFAULT_THETA_HI),
        )
    }

    /// `t_grid`, or quarter steps up to 8.
    pub fn t_grid(&self) -> FieldResult<Vec<f64>> {
        match &self.t_grid {
            Some(g) if g.is_empty() => Err(field_error("t_grid", "must not be empty")),
            Some(g) => Ok(g.clone()),
            None => Ok((1..=32).map(|i| i as f64 * 0.25).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"law": {"kind": "exponential", "rate": 1.0}}"#;

    #[test]
    fn missing_law_is_named() {
        let err = ExperimentConfig::from_json(r#"{"op": "survival"}"#).unwrap_err();
        assert!(err.contains("law"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = ExperimentConfig::from_json(
            r#"{"law": {"kind": "exponential", "rate": 1.0}, "lamda": 1}"#,
        )
        .unwrap_err();
        assert!(err.contains("lamda"), "{err}");
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn lambda_max_defaults_to_largest_rate() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.lambda_max(&[0.1, 0.5]).unwrap(), 0.5);
        c.lambda_max = Some(0.2);
        assert_eq!(c.lambda_max(&[0.1, 0.5]).unwrap_err().field, "lambda_max");
    }

    #[test]
    fn op_names_are_kebab_case() {
        assert_eq!(Op::PrScan.to_string(), "pr-scan");
        let c = ExperimentConfig::from_json(
            r#"{"law": {"kind": "uniform", "b": 2.0}, "op": "lambda-c"}"#,
        )
        .unwrap();
        assert_eq!(c.op, Some(Op::LambdaC));
    }
}
