use super::*;
use crate::error::Error;
use crate::graphical::{HarrisSystem, Lattice, Window};
use crate::renewal::InterarrivalLaw;

const EXP1: InterarrivalLaw = InterarrivalLaw::Exponential { rate: 1.0 };

fn line(
    hi: i64,
    horizon: f64,
    marks: Vec<Vec<f64>>,
    arrows: &[(usize, usize, f64, f64)],
) -> HarrisSystem {
    HarrisSystem::from_events(
        Lattice::line(0, hi).unwrap(),
        Window::new(0.0, horizon).unwrap(),
        EXP1,
        marks,
        arrows,
    )
    .unwrap()
}

fn h1() -> HarrisSystem {
    line(1, 4.0, vec![vec![3.0], vec![0.5, 2.0]], &[(0, 1, 1.0, 0.5)])
}

/// Only the path 0 -> 1 -> 0 survives to the top.
fn h2() -> HarrisSystem {
    line(
        2,
        10.0,
        vec![vec![3.0], vec![1.0, 8.0], vec![0.5]],
        &[(0, 1, 2.0, 0.4), (1, 0, 6.0, 0.9)],
    )
}

fn rect(a: i64, b: i64, s: f64, t: f64) -> SpaceTimeRect {
    SpaceTimeRect::interval(a, b, s, t).unwrap()
}

#[test]
fn h1_intervals() {
    let sys = h1();
    let set = propagate(&sys, 1.0, &SeedSet::point(0, 0.0), &rect(0, 1, 0.0, 4.0)).unwrap();
    assert_eq!(
        set.spans(),
        vec![vec![(0.0, 3.0, false)], vec![(1.0, 2.0, false)]]
    );
    assert_eq!(
        survival_time(&sys, 1.0, 0, 4.0).unwrap(),
        Survival::Died(3.0)
    );
    assert_eq!(
        survival_time(&sys, 0.0, 0, 4.0).unwrap(),
        Survival::Died(3.0)
    );
    // arrow mark 0.5 is inactive below lambda 0.5
    let low = propagate(&sys, 0.4, &SeedSet::point(0, 0.0), &rect(0, 1, 0.0, 4.0)).unwrap();
    assert_eq!(low.spans(), vec![vec![(0.0, 3.0, false)], vec![]]);
}

#[test]
fn isolated_seed_runs_to_first_mark() {
    let sys = line(2, 10.0, vec![vec![4.0, 6.0], vec![], vec![1.0]], &[]);
    let set = propagate(&sys, 1.0, &SeedSet::point(0, 0.0), &rect(0, 2, 0.0, 10.0)).unwrap();
    assert_eq!(set.spans()[0], vec![(0.0, 4.0, false)]);
    assert_eq!(set.len(), 1);
}

#[test]
fn seed_on_mark_is_rejected() {
    let sys = h1();
    let r = propagate(&sys, 1.0, &SeedSet::point(1, 0.5), &rect(0, 1, 0.0, 4.0));
    assert!(
        matches!(r, Err(Error::InvalidSeed { site: 1, .. })),
        "{r:?}"
    );
}

#[test]
fn out_of_range_lambda_and_region() {
    let sys = h1();
    assert!(matches!(
        propagate(&sys, 1.5, &SeedSet::point(0, 0.0), &rect(0, 1, 0.0, 4.0)),
        Err(Error::OutOfCouplingRange { .. })
    ));
    assert!(matches!(
        propagate(&sys, 1.0, &SeedSet::point(0, 0.0), &rect(0, 2, 0.0, 4.0)),
        Err(Error::RegionOutsideSystem(_))
    ));
}

#[test]
fn simultaneous_arrows_abort() {
    let sys = line(
        2,
        5.0,
        vec![vec![]; 3],
        &[(0, 1, 1.0, 0.5), (1, 2, 1.0, 0.5)],
    );
    let r = propagate(&sys, 1.0, &SeedSet::point(0, 0.0), &rect(0, 2, 0.0, 5.0));
    assert_eq!(r, Err(Error::Tie(1.0)));
}

#[test]
fn arrow_onto_mark_is_blocked() {
    let sys = line(1, 5.0, vec![vec![], vec![0.5, 2.0]], &[(0, 1, 2.0, 0.5)]);
    let set = propagate(&sys, 1.0, &SeedSet::point(0, 0.0), &rect(0, 1, 0.0, 5.0)).unwrap();
    assert!(set.intervals(1).is_empty());
}

#[test]
fn h2_zigzag_temporal_crossing() {
    let sys = h2();
    let out = temporal_crossing(&sys, 1.0, &rect(0, 2, 0.0, 10.0)).unwrap();
    assert!(out.crossed());
    let w = out.witness(&sys).unwrap();
    assert_eq!(w.legs, vec![(0, 0.0), (1, 2.0), (0, 6.0)]);
    assert_eq!(w.end, 10.0);
    assert_eq!(w.variation(&sys), 1);
    w.validate(&sys, 1.0).unwrap();
    // the return arrow needs lambda >= 0.9
    assert!(!has_temporal_crossing(&sys, 0.8, &rect(0, 2, 0.0, 10.0)).unwrap());
    assert!(!has_spatial_crossing(&sys, 1.0, &rect(0, 2, 0.0, 10.0)).unwrap());
    assert!(has_spatial_crossing(&sys, 1.0, &rect(0, 1, 0.0, 10.0)).unwrap());
}

#[test]
fn witness_validation_catches_bad_paths() {
    let sys = h2();
    let bad_mark = PathWitness {
        legs: vec![(0, 0.0)],
        end: 4.0,
    };
    assert!(bad_mark.validate(&sys, 1.0).is_err());
    let bad_arrow = PathWitness {
        legs: vec![(0, 0.0), (1, 2.5)],
        end: 3.0,
    };
    assert!(bad_arrow.validate(&sys, 1.0).is_err());
    let inactive = PathWitness {
        legs: vec![(0, 0.0), (1, 2.0)],
        end: 3.0,
    };
    assert!(inactive.validate(&sys, 0.3).is_err());
    assert!(inactive.validate(&sys, 0.5).is_ok());
}

#[test]
fn trivial_crossings() {
    let sys = line(1, 10.0, vec![vec![], vec![5.0]], &[]);
    assert!(has_temporal_crossing(&sys, 1.0, &rect(0, 1, 0.0, 10.0)).unwrap());
    assert!(!has_temporal_crossing(&sys, 1.0, &rect(1, 1, 0.0, 10.0)).unwrap());
    assert!(has_spatial_crossing(&sys, 1.0, &rect(1, 1, 0.0, 10.0)).unwrap());
    assert!(!has_spatial_crossing(&sys, 1.0, &rect(0, 1, 0.0, 10.0)).unwrap());
    let all_marked = line(1, 10.0, vec![vec![2.0], vec![5.0]], &[]);
    assert!(!has_temporal_crossing(&all_marked, 1.0, &rect(0, 1, 0.0, 10.0)).unwrap());
}

#[test]
fn temporal_crossing_skips_site_marked_at_bottom() {
    let sys = line(0, 10.0, vec![vec![1.0]], &[]);
    assert!(!has_temporal_crossing(&sys, 1.0, &rect(0, 0, 1.0, 10.0)).unwrap());
    assert!(has_temporal_crossing(&sys, 1.0, &rect(0, 0, 1.5, 10.0)).unwrap());
}

fn staircase_params() -> DiagonalParams {
    DiagonalParams {
        c: 2.0 / 3.0,
        eps: 0.9,
        l: 3,
        t: 12.0,
        v: 0.0,
    }
}

fn staircase(with_last: bool, back: bool) -> HarrisSystem {
    let mut arrows = vec![(0, 1, 1.5, 0.5), (1, 2, 4.0, 0.5)];
    if with_last {
        arrows.push((2, 3, 6.0, 0.5));
    }
    if back {
        arrows.extend([(3, 2, 9.5, 0.5), (2, 1, 11.0, 0.5), (1, 0, 13.0, 0.5)]);
    }
    line(
        3,
        20.0,
        vec![vec![2.0], vec![5.0], vec![7.5], vec![17.5]],
        &arrows,
    )
}

#[test]
fn staircase_realizes_a0() {
    let p = staircase_params();
    let sys = staircase(true, false);
    let out = diagonal_crossing(&sys, 1.0, &p, 0).unwrap();
    assert!(out.crossed());
    let w = out.witness(&sys).unwrap();
    w.validate(&sys, 1.0).unwrap();
    assert_eq!(w.finish().0, 3);
    assert!(w.end >= 8.0 && w.end <= 8.9);
    assert_eq!(w.variation(&sys), 3);
    assert!(!detect_a0(&staircase(false, false), 1.0, &p).unwrap());
}

#[test]
fn a0_parameter_domain() {
    let sys = staircase(true, false);
    let mut p = staircase_params();
    p.eps = 1.0; // cT/8 = 1
    assert!(matches!(
        detect_a0(&sys, 1.0, &p),
        Err(Error::ParameterDomain(_))
    ));
    p.eps = 0.5;
    p.c = 0.5;
    assert!(matches!(
        detect_a0(&sys, 1.0, &p),
        Err(Error::ParameterDomain(_))
    ));
}

#[test]
fn a0_with_zero_width_is_single_timeline() {
    let p = DiagonalParams {
        l: 0,
        ..staircase_params()
    };
    let free = line(0, 20.0, vec![vec![12.0]], &[]);
    assert!(detect_a0(&free, 1.0, &p).unwrap());
    let cut = line(0, 20.0, vec![vec![4.0]], &[]);
    assert!(!detect_a0(&cut, 1.0, &p).unwrap());
}

#[test]
fn double_staircase_chain() {
    let p = staircase_params();
    let sys = staircase(true, true);
    let chain = detect_chain(&sys, 1.0, 1, &p).unwrap();
    assert_eq!(
        chain,
        ChainOutcome {
            indicators: vec![true, true],
            truncated: false
        }
    );
    assert_eq!(
        detect_chain(&sys, 1.0, 0, &p).unwrap().indicators,
        vec![detect_a0(&sys, 1.0, &p).unwrap()]
    );
    let one = detect_chain(&staircase(true, false), 1.0, 1, &p).unwrap();
    assert_eq!(one.indicators, vec![true, false]);
    // both diagonals together cross [0, L] from time eps to the end of the second one
    let top = p.source(1).0 + p.c * p.t;
    assert!(has_temporal_crossing(&sys, 1.0, &rect(0, 3, p.eps, top)).unwrap());
    let trunc = detect_chain(&sys, 1.0, 3, &p).unwrap();
    assert!(trunc.truncated);
    assert_eq!(trunc.indicators.len(), 2);
}

#[test]
fn chain_without_arrows_is_false() {
    let sys = line(3, 30.0, vec![vec![]; 4], &[]);
    let chain = detect_chain(&sys, 1.0, 2, &staircase_params()).unwrap();
    assert_eq!(chain.indicators, vec![false; 3]);
}

/// Only the four sites 1..=4 together carry a temporal crossing.
fn corridor() -> HarrisSystem {
    line(
        5,
        10.0,
        vec![
            vec![1.0],
            vec![3.0],
            vec![1.5, 5.0],
            vec![0.5, 7.0],
            vec![0.2],
            vec![1.0],
        ],
        &[(1, 2, 2.0, 0.5), (2, 3, 4.0, 0.5), (3, 4, 6.0, 0.5)],
    )
}

#[test]
fn windowed_crossing_needs_full_corridor() {
    let sys = corridor();
    let r = rect(0, 5, 0.0, 10.0);
    assert!(windowed_temporal_crossing(&sys, 1.0, &r, 4).unwrap());
    assert!(!windowed_temporal_crossing(&sys, 1.0, &r, 3).unwrap());
    assert!(!windowed_temporal_crossing(&sys, 1.0, &r, 1).unwrap());
    assert_eq!(
        windowed_temporal_crossing(&sys, 1.0, &r, 6).unwrap(),
        has_temporal_crossing(&sys, 1.0, &r).unwrap()
    );
    let one_free = line(2, 10.0, vec![vec![3.0], vec![], vec![4.0]], &[]);
    assert!(windowed_temporal_crossing(&one_free, 1.0, &rect(0, 2, 0.0, 10.0), 1).unwrap());
}

#[test]
fn segment_seeds_split_at_marks() {
    let sys = line(0, 10.0, vec![vec![2.0, 5.0]], &[]);
    let set = propagate(
        &sys,
        1.0,
        &SeedSet::segments(&[0], 1.0, 6.0),
        &rect(0, 0, 0.0, 10.0),
    )
    .unwrap();
    assert_eq!(
        set.spans()[0],
        vec![(1.0, 2.0, false), (2.0, 5.0, false), (5.0, 10.0, true)]
    );
}

#[test]
fn union_matches_joint_seeds() {
    let sys = h2();
    let r = rect(0, 2, 0.0, 10.0);
    let a = SeedSet::point(0, 0.0);
    let b = SeedSet::point(1, 1.5);
    let joint = propagate(&sys, 1.0, &a.union(&b), &r).unwrap();
    let split = propagate(&sys, 1.0, &a, &r)
        .unwrap()
        .union(&propagate(&sys, 1.0, &b, &r).unwrap());
    assert_eq!(joint.spans(), split.spans());
}

#[test]
fn h1_diagram_counts() {
    let sys = h1();
    let set = propagate(&sys, 1.0, &SeedSet::point(0, 0.0), &rect(0, 1, 0.0, 4.0)).unwrap();
    let svg = render_svg(&sys, 1.0, Some(&set), 0.0, 4.0).unwrap();
    for (class, n) in [("timeline", 2), ("mark", 3), ("arrow", 1), ("infected", 2)] {
        assert_eq!(
            svg.matches(&format!("class=\"{class}\"")).count(),
            n,
            "{class}"
        );
    }
    assert_eq!(svg, render_svg(&sys, 1.0, Some(&set), 0.0, 4.0).unwrap());
}
