#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rcp_core::graphical::{build_harris, BuildOptions, HarrisSystem, Lattice, StartPolicy, Window};
use rcp_core::reachability::{propagate, InfectedIntervalSet, Seed, SeedSet, SpaceTimeRect};
use rcp_core::renewal::InterarrivalLaw;

pub const EXP1: InterarrivalLaw = InterarrivalLaw::Exponential { rate: 1.0 };

pub struct Small {
    pub sys: HarrisSystem,
    /// (from, to, time, mark)
    pub arrows: Vec<(usize, usize, f64, f64)>,
    pub marks: Vec<Vec<f64>>,
}

pub fn random_small(rng: &mut ChaCha8Rng) -> Small {
    let lattice = match rng.random_range(0..5) {
        0 => Lattice::new(vec![0, 0], vec![1, 1]).unwrap(),
        k => Lattice::line(0, k as i64).unwrap(),
    };
    let n = lattice.num_sites();
    let edges = lattice.directed_edges();
    let total = rng.random_range(0..=12usize);
    let mut marks = vec![Vec::new(); n];
    let mut arrows = Vec::new();
    for _ in 0..total {
        let t = rng.random_range(0.01..10.0);
        if rng.random_bool(0.4) {
            marks[rng.random_range(0..n)].push(t);
        } else {
            let (a, b) = edges[rng.random_range(0..edges.len())];
            arrows.push((a, b, t, rng.random_range(0.01..1.0)));
        }
    }
    for m in &mut marks {
        m.sort_by(f64::total_cmp);
    }
    let sys = HarrisSystem::from_events(
        lattice,
        Window::new(0.0, 10.0).unwrap(),
        EXP1,
        marks.clone(),
        &arrows,
    )
    .unwrap();
    Small { sys, arrows, marks }
}

/// Every arrival `(site, time)` of a path from a seed, by depth-first enumeration of arrow sequences.
pub fn enumerate_arrivals(
    s: &Small,
    lambda: f64,
    seeds: &[(usize, f64)],
    in_region: &dyn Fn(usize) -> bool,
    t_lo: f64,
    t_hi: f64,
) -> Vec<(usize, f64)> {
    fn marked_between(marks: &[f64], a: f64, b: f64) -> bool {
        marks.iter().any(|&m| a <= m && m < b)
    }
    let mut out = Vec::new();
    let mut stack: Vec<(usize, f64)> = seeds
        .iter()
        .copied()
        .filter(|&(x, t)| in_region(x) && t_lo <= t && t <= t_hi && !s.marks[x].contains(&t))
        .collect();
    while let Some((x, t)) = stack.pop() {
        out.push((x, t));
        for &(a, b, u, mark) in &s.arrows {
            if a == x
                && mark <= lambda
                && u > t
                && u <= t_hi
                && in_region(b)
                && !marked_between(&s.marks[x], t, u + f64::MIN_POSITIVE)
                && !s.marks[x].contains(&u)
                && !s.marks[b].contains(&u)
            {
                stack.push((b, u));
            }
        }
    }
    out
}

pub fn oracle_infected(s: &Small, arrivals: &[(usize, f64)], site: usize, t: f64) -> bool {
    !s.marks[site].contains(&t)
        && arrivals
            .iter()
            .any(|&(y, a)| y == site && a <= t && !s.marks[site].iter().any(|&m| a <= m && m <= t))
}

pub fn probe_times(s: &Small, t_lo: f64, t_hi: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = s
        .marks
        .iter()
        .flatten()
        .copied()
        .chain(s.arrows.iter().map(|a| a.2))
        .collect();
    ts.extend([t_lo, t_hi]);
    ts.retain(|&t| t_lo <= t && t <= t_hi);
    ts.sort_by(f64::total_cmp);
    let mids: Vec<f64> = ts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    ts.extend(mids);
    ts
}

pub fn covered(set: &InfectedIntervalSet, site: usize, t: f64, marks: &[f64]) -> bool {
    !marks.contains(&t) && set.interval_at(site, t).is_some()
}

pub fn sample_system(
    seed: u64,
    law: InterarrivalLaw,
    half: i64,
    horizon: f64,
    policy: StartPolicy,
) -> HarrisSystem {
    let opts = BuildOptions {
        start_policy: policy,
        ..Default::default()
    };
    build_harris(
        &Lattice::line(-half, half).unwrap(),
        Window::new(0.0, horizon).unwrap(),
        &law,
        1.0,
        seed,
        &opts,
    )
    .unwrap()
}

pub fn is_subset(small: &InfectedIntervalSet, big: &InfectedIntervalSet) -> bool {
    small.iter().all(|(site, iv)| {
        big.intervals(site)
            .iter()
            .any(|b| b.start <= iv.start && (iv.end <= b.end) && (!iv.reaches_cap || b.reaches_cap))
    })
}

/// Draw one small system, seeds, rate and sub-box, and compare `propagate`
/// with path enumeration at every probe time. Returns the number of probes.
pub fn compare_with_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let s = random_small(rng);
    let lattice = s.sys.lattice().clone();
    let n = lattice.num_sites();
    let lambda = rng.random_range(0.0..=1.0);
    let seeds: Vec<(usize, f64)> = (0..rng.random_range(1..=2))
        .map(|_| (rng.random_range(0..n), rng.random_range(0.0..6.0)))
        .collect();
    // random sub-box along axis 0, full along the others
    let mut lo = lattice.lo().to_vec();
    let mut hi = lattice.hi().to_vec();
    let a = rng.random_range(lo[0]..=hi[0]);
    let b = rng.random_range(a..=hi[0]);
    lo[0] = a;
    hi[0] = b;
    let t_lo = if rng.random_bool(0.5) {
        0.0
    } else {
        rng.random_range(0.0..3.0)
    };
    let t_hi = if rng.random_bool(0.5) {
        10.0
    } else {
        rng.random_range(6.0..10.0)
    };
    let region =
        SpaceTimeRect::new(lo.clone(), hi.clone(), t_lo, t_hi).map_err(|e| e.to_string())?;
    let in_region = |x: usize| {
        let c = lattice.coords(x);
        c.iter().enumerate().all(|(k, &v)| lo[k] <= v && v <= hi[k])
    };
    let seed_set = SeedSet(
        seeds
            .iter()
            .map(|&(site, time)| Seed::Point { site, time })
            .collect(),
    );
    let set = propagate(&s.sys, lambda, &seed_set, &region).map_err(|e| e.to_string())?;
    let arrivals = enumerate_arrivals(&s, lambda, &seeds, &in_region, t_lo, t_hi);
    let mut compared = 0;
    for site in 0..n {
        for &t in &probe_times(&s, t_lo, t_hi) {
            let want = in_region(site) && oracle_infected(&s, &arrivals, site, t);
            let got = covered(&set, site, t, &s.marks[site]);
            if got != want {
                return Err(format!("site {site} t {t}: propagate {got}, paths {want}"));
            }
            compared += 1;
        }
    }
    // interval ends are marks or the cap
    for (site, iv) in set.iter() {
        if !(iv.end == t_hi || s.marks[site].contains(&iv.end)) {
            return Err(format!(
                "site {site}: interval ends at {} which is neither a mark nor the cap",
                iv.end
            ));
        }
    }
    Ok(compared)
}
