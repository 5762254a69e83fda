use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::renewal::{sample_train, InterarrivalLaw, RenewalTrain};
use crate::rng::{stream_rng, Stream};

/// Default cap on the expected number of sampled events per system.
pub const DEFAULT_MAX_EVENTS: f64 = 5e7;

/// Environment variable overriding [`DEFAULT_MAX_EVENTS`].
pub const MAX_EVENTS_ENV: &str = "RCP_MAX_EVENTS";

/// Parse a capacity override; it must be a positive number.
pub fn parse_max_events(raw: &str) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(v),
        _ => Err(Error::Precondition(format!(
            "{MAX_EVENTS_ENV} must be a positive number, got {raw:?}"
        ))),
    }
}

/// Capacity cap in effect: `RCP_MAX_EVENTS` if set and valid, else the default.
/// Read once per process.
pub fn max_events() -> f64 {
    static CAP: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(MAX_EVENTS_ENV)
            .ok()
            .and_then(|v| parse_max_events(&v).ok())
            .unwrap_or(DEFAULT_MAX_EVENTS)
    })
}

/// Closed time window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// One infection arrow with its coupling mark `u ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub time: f64,
    pub mark: f64,
}

/// Where the renewal trains start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartPolicy {
    /// Every train starts at time 0.
    #[default]
    AllAtZero,
    /// Independent starts uniform on `[-width, 0]`.
    UniformOffset { width: f64 },
    /// One start per site, in site-index order.
    Explicit { starts: Vec<f64> },
}

impl StartPolicy {
    fn start<R: Rng>(&self, site: usize, rng: &mut R) -> f64 {
        match self {
            StartPolicy::AllAtZero => 0.0,
            StartPolicy::UniformOffset { width } => -width * rng.random::<f64>(),
            StartPolicy::Explicit { starts } => starts[site],
        }
    }

    pub fn label(&self) -> String {
        match self {
            StartPolicy::AllAtZero => "all_at_zero".to_string(),
            StartPolicy::UniformOffset { width } => format!("uniform_offset_{width}"),
            StartPolicy::Explicit { .. } => "explicit".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub start_policy: StartPolicy,
    pub max_events: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            start_policy: StartPolicy::AllAtZero,
            max_events: max_events(),
        }
    }
}

/// Frozen Harris system on a finite space-time box.
///
/// Arrows are stored per ordered edge, sorted by time, each with a uniform
/// mark; the arrow is present at infection rate `λ` iff `mark <= λ / lambda_max`,
/// so the arrow sets are nested in `λ` on every realization.
#[derive(Debug, Clone, PartialEq)]
pub struct HarrisSystem {
    pub(crate) lattice: Lattice,
    pub(crate) horizon: Window,
    pub(crate) law: InterarrivalLaw,
    pub(crate) lambda_max: f64,
    pub(crate) seed: u64,
    pub(crate) start_policy: StartPolicy,
    pub(crate) edges: Vec<(usize, usize)>,
    pub(crate) arrows: Vec<Vec<Arrow>>,
    pub(crate) trains: Vec<RenewalTrain>,
}

/// Expected number of arrows plus renewal marks of a build.
pub fn expected_events(
    lattice: &Lattice,
    horizon: Window,
    law: &InterarrivalLaw,
    lambda_max: f64,
    policy: &StartPolicy,
) -> f64 {
    let edges = lattice.directed_edges().len() as f64;
    let back = match policy {
        StartPolicy::AllAtZero => (-horizon.lo).max(0.0),
        StartPolicy::UniformOffset { width } => width + (-horizon.lo).max(0.0),
        StartPolicy::Explicit { starts } => starts
            .iter()
            .map(|s| (horizon.lo - s).max(0.0))
            .fold(0.0, f64::max),
    };
    let mean = law.mean();
    let per_site = if mean.is_finite() && mean > 0.0 {
        (horizon.len() + back) / mean + 1.0
    } else {
        1.0
    };
    edges * lambda_max * horizon.len() + lattice.num_sites() as f64 * per_site
}

/// Sample a Harris system: independent rate-`lambda_max` arrow streams with
/// uniform marks on every ordered edge, and one renewal train per site.
pub fn build_harris(
    lattice: &Lattice,
    horizon: Window,
    law: &InterarrivalLaw,
    lambda_max: f64,
    seed: u64,
    opts: &BuildOptions,
) -> Result<HarrisSystem> {
    law.validate()?;
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(Error::Precondition(format!(
            "lambda_max must be >= 0, got {lambda_max}"
        )));
    }
    if let StartPolicy::Explicit { starts } = &opts.start_policy {
        if starts.len() != lattice.num_sites() {
            return Err(Error::Precondition(format!(
                "explicit start policy has {} starts for {} sites",
                starts.len(),
                lattice.num_sites()
            )));
        }
    }
    if let StartPolicy::UniformOffset { width } = opts.start_policy {
        if !(width >= 0.0) {
            return Err(Error::Precondition(format!(
                "offset width must be >= 0, got {width}"
            )));
        }
    }
    let expected = expected_events(lattice, horizon, law, lambda_max, &opts.start_policy);
    if expected > opts.max_events {
        return Err(Error::Capacity {
            expected,
            cap: opts.max_events,
        });
    }

    let edges = lattice.directed_edges();
    let mut arrows = Vec::with_capacity(edges.len());
    for e in 0..edges.len() {
        let mut rng = stream_rng(seed, Stream::Edge(e));
        let mut list = Vec::new();
        if lambda_max > 0.0 {
            let mut t = horizon.lo;
            loop {
                t += -crate::renewal::open_unit(&mut rng).ln() / lambda_max;
                if t > horizon.hi {
                    break;
                }
                let mark = 1.0 - rng.random::<f64>();
                if list.last().is_some_and(|a: &Arrow| a.time >= t) {
                    return Err(Error::Tie(t));
                }
                list.push(Arrow { time: t, mark });
            }
        }
        arrows.push(list);
    }

    let mut trains = Vec::with_capacity(lattice.num_sites());
    for site in 0..lattice.num_sites() {
        let mut offset_rng = stream_rng(seed, Stream::StartOffset(site));
        let start = opts.start_policy.start(site, &mut offset_rng);
        if start > horizon.hi {
            return Err(Error::Precondition(format!(
                "train start {start} of site {site} after horizon end {}",
                horizon.hi
            )));
        }
        let mut rng = stream_rng(seed, Stream::Train(site));
        trains.push(sample_train(law, start, horizon.hi, &mut rng)?);
    }

    Ok(HarrisSystem {
        lattice: lattice.clone(),
        horizon,
        law: *law,
        lambda_max,
        seed,
        start_policy: opts.start_policy.clone(),
        edges,
        arrows,
        trains,
    })
}

impl HarrisSystem {
    /// Assemble a system from explicit parts (hand-built systems, dumps).
    ///
    /// `arrows` lists `(from, to, arrows)` by site index; edges not listed are empty.
    pub fn from_parts(
        lattice: Lattice,
        horizon: Window,
        law: InterarrivalLaw,
        lambda_max: f64,
        seed: u64,
        start_policy: StartPolicy,
        trains: Vec<RenewalTrain>,
        arrows: Vec<(usize, usize, Vec<Arrow>)>,
    ) -> Result<Self> {
        if trains.len() != lattice.num_sites() {
            return Err(Error::Precondition(format!(
                "{} trains for {} sites",
                trains.len(),
                lattice.num_sites()
            )));
        }
        if let Some((i, t)) = trains
            .iter()
            .enumerate()
            .find(|(_, t)| t.horizon < horizon.hi)
        {
            return Err(Error::Precondition(format!(
                "train of site {i} observed only up to {} < {}",
                t.horizon, horizon.hi
            )));
        }
        let edges = lattice.directed_edges();
        let mut per_edge = vec![Vec::new(); edges.len()];
        for (from, to, list) in arrows {
            let e = edges.iter().position(|&p| p == (from, to)).ok_or_else(|| {
                Error::Precondition(format!("({from}, {to}) is not an edge of the lattice"))
            })?;
            for w in list.windows(2) {
                if !(w[0].time < w[1].time) {
                    return Err(Error::Tie(w[1].time));
                }
            }
            if let Some(a) = list
                .iter()
                .find(|a| !horizon.contains(a.time) || !(a.mark > 0.0 && a.mark <= 1.0))
            {
                return Err(Error::Precondition(format!(
                    "arrow {a:?} outside horizon or mark range"
                )));
            }
            per_edge[e] = list;
        }
        Ok(Self {
            lattice,
            horizon,
            law,
            lambda_max,
            seed,
            start_policy,
            edges,
            arrows: per_edge,
            trains,
        })
    }

    /// Hand-built system with trains started at `horizon.lo` and observed to `horizon.hi`.
    ///
    /// `arrows` are `(from, to, time, mark)` by site index, in any order. The
    /// law is only recorded, not sampled; `lambda_max` is 1.
    pub fn from_events(
        lattice: Lattice,
        horizon: Window,
        law: InterarrivalLaw,
        marks: Vec<Vec<f64>>,
        arrows: &[(usize, usize, f64, f64)],
    ) -> Result<Self> {
        let trains = marks
            .into_iter()
            .map(|m| RenewalTrain::from_marks(horizon.lo, horizon.hi, m))
            .collect::<Result<Vec<_>>>()?;
        let mut grouped: Vec<(usize, usize, Vec<Arrow>)> = Vec::new();
        for &(from, to, time, mark) in arrows {
            match grouped.iter_mut().find(|g| g.0 == from && g.1 == to) {
                Some(g) => g.2.push(Arrow { time, mark }),
                None => grouped.push((from, to, vec![Arrow { time, mark }])),
            }
        }
        for g in &mut grouped {
            g.2.sort_by(|a, b| a.time.total_cmp(&b.time));
        }
        let policy = StartPolicy::Explicit {
            starts: vec![horizon.lo; lattice.num_sites()],
        };
        Self::from_parts(lattice, horizon, law, 1.0, 0, policy, trains, grouped)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn horizon(&self) -> Window {
        self.horizon
    }

    pub fn law(&self) -> &InterarrivalLaw {
        &self.law
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn start_policy(&self) -> &StartPolicy {
        &self.start_policy
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_arrows(&self, edge: usize) -> &[Arrow] {
        &self.arrows[edge]
    }

    pub fn trains(&self) -> &[RenewalTrain] {
        &self.trains
    }

    pub fn train(&self, site: usize) -> &RenewalTrain {
        &self.trains[site]
    }

    pub fn num_events(&self) -> usize {
        self.arrows.iter().map(Vec::len).sum::<usize>()
            + self.trains.iter().map(|t| t.len()).sum::<usize>()
    }

    pub(crate) fn check_lambda(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0 && lambda <= self.lambda_max) {
            return Err(Error::OutOfCouplingRange {
                lambda,
                lambda_max: self.lambda_max,
            });
        }
        Ok(if self.lambda_max > 0.0 {
            lambda / self.lambda_max
        } else {
            0.0
        })
    }

    /// Arrow times active at rate `lambda`, per edge.
    pub fn active_arrows(&self, lambda: f64) -> Result<Vec<Vec<f64>>> {
        let threshold = self.check_lambda(lambda)?;
        Ok(self
            .arrows
            .iter()
            .map(|list| {
                list.iter()
                    .filter(|a| a.mark <= threshold)
                    .map(|a| a.time)
                    .collect()
            })
            .collect())
    }
}
