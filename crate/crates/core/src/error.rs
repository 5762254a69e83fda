use thiserror::Error;

/// Errors raised by the simulator and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid law parameters: {0}")]
    InvalidLaw(String),

    #[error("hazard undefined at t = {t}: survivor function is zero")]
    HazardUndefined { t: f64 },

    #[error("law does not have a nonincreasing hazard rate: {0}")]
    NotDecreasingHazard(String),

    #[error("hazard {hazard} exceeds field ceiling {u_cap}")]
    HazardExceedsCap { hazard: f64, u_cap: f64 },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid time window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },

    #[error("expected {expected} events exceeds capacity cap {cap}")]
    Capacity { expected: f64, cap: f64 },

    #[error("lambda {lambda} outside coupling range [0, {lambda_max}]")]
    OutOfCouplingRange { lambda: f64, lambda_max: f64 },

    #[error("invalid seed at site {site}, time {time}: {reason}")]
    InvalidSeed {
        site: usize,
        time: f64,
        reason: String,
    },

    #[error("region outside system: {0}")]
    RegionOutsideSystem(String),

    #[error("parameter domain violation: {0}")]
    ParameterDomain(String),

    #[error("simultaneous events at time {0}")]
    Tie(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no bracket found within {probes} probes")]
    BracketNotFound { probes: usize },

    #[error("dump version mismatch: file has {found}, reader supports {supported}")]
    DumpVersion { found: String, supported: String },

    #[error("malformed dump: {0}")]
    DumpFormat(String),

    #[error("output: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
