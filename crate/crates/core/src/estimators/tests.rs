use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};

use super::*;
use crate::error::Error;
use crate::graphical::{build_harris, BuildOptions, HarrisSystem, Lattice, StartPolicy, Window};
use crate::reachability::{detect_gap, stopping_index, SpaceTimeRect};
use crate::renewal::{sample_train, InterarrivalLaw};
use crate::rng::{replicate_seed, stream_rng, Stream};

const EXP1: InterarrivalLaw = InterarrivalLaw::Exponential { rate: 1.0 };
const PARETO15: InterarrivalLaw = InterarrivalLaw::ShiftedPareto {
    alpha: 1.5,
    scale: 1.0,
};
const PARETO2: InterarrivalLaw = InterarrivalLaw::ShiftedPareto {
    alpha: 2.0,
    scale: 1.0,
};

#[test]
fn estimates_bracket_their_mean() {
    for (k, n) in [(0, 10), (10, 10), (3, 17), (500, 1000)] {
        let e = Estimate::proportion(k, n, 1);
        assert!(e.ci_lo <= e.mean && e.mean <= e.ci_hi, "{e:?}");
        assert_eq!(e.successes(), k);
    }
    let e = Estimate::from_samples(&[1.0, 2.0, 4.0], 0);
    assert!(e.ci_lo <= e.mean && e.mean <= e.ci_hi);
}

#[test]
fn survival_at_zero_is_isolated_origin() {
    let setup = SurvivalSetup::new(PARETO15, 1, 5, 6.0, 1.0);
    let n = 300;
    let est = estimate_survival(&setup, &[0.0], n, 11).unwrap()[0];
    let alive = (0..n)
        .filter(|&i| {
            let sys = setup.build(replicate_seed(11, i)).unwrap();
            sys.train(setup.origin(&sys)).marks_in(0.0, 6.0).is_empty()
        })
        .count() as u64;
    assert_eq!(est.successes(), alive);
    assert!(alive > 0);
}

#[test]
fn survival_is_coupled_in_lambda() {
    let setup = SurvivalSetup::new(EXP1, 1, 20, 20.0, 2.0);
    let flags = survival_flags(&setup, &[0.5, 1.0, 2.0], 200, 3).unwrap();
    for f in &flags {
        assert!(f.windows(2).all(|w| w[0] <= w[1]), "{f:?}");
    }
    let est = estimate_survival(&setup, &[0.5, 1.0, 2.0], 200, 3).unwrap();
    assert!(est.windows(2).all(|w| w[0].mean <= w[1].mean));
    assert!(matches!(
        estimate_survival(&setup, &[2.5], 10, 3),
        Err(Error::OutOfCouplingRange { .. })
    ));
}

#[test]
fn exponential_branching_constant() {
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let b = branching_bound(&EXP1, 1, &grid, 20_000, 5).unwrap();
    assert!((b.c_hat - 2.0).abs() < 0.05, "{b:?}");
    assert!((b.lambda0 - 0.25).abs() < 0.01);
    // E|I_t| = 2 - e^{-t} at every grid point
    for (t, e) in &b.per_t {
        let want = 2.0 - (-t).exp();
        assert!(
            (e.mean - want).abs() < 3.0 * (e.ci_hi - e.ci_lo) / 3.92 + 1e-9,
            "t {t}: {e:?}"
        );
    }
    assert!(b.lambda0_lo <= b.lambda0 && b.lambda0 <= b.lambda0_hi);
}

#[test]
fn uniform_branching_constant_matches_direct_simulation() {
    let law = InterarrivalLaw::Uniform { b: 2.0 };
    let grid = [3.0, 7.0];
    let b = branching_bound(&law, 1, &grid, 20_000, 8).unwrap();
    // independent oracle: rand_distr uniforms, straddling interval at t = 7
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let u = Uniform::new(0.0, 2.0).unwrap();
    let lens: Vec<f64> = (0..20_000)
        .map(|_| {
            let (mut prev, mut next) = (0.0, u.sample(&mut rng));
            while next <= 7.0 {
                prev = next;
                next += u.sample(&mut rng);
            }
            next - prev
        })
        .collect();
    let oracle = Estimate::from_samples(&lens, 0);
    let e = b.per_t[1].1;
    let se = ((e.ci_hi - e.ci_lo).powi(2) + (oracle.ci_hi - oracle.ci_lo).powi(2)).sqrt() / 3.92;
    assert!(
        (e.mean - oracle.mean).abs() < 3.0 * se,
        "{e:?} vs {oracle:?}"
    );
    // renewal-theory limit E[X^2]/E[X] = 4/3
    assert!((oracle.mean - 4.0 / 3.0).abs() < 0.03);
}

#[test]
fn branching_bound_needs_second_moment() {
    assert!(matches!(
        branching_bound(&PARETO15, 1, &[1.0], 100, 1),
        Err(Error::Precondition(_))
    ));
}

fn h1() -> HarrisSystem {
    HarrisSystem::from_events(
        Lattice::line(0, 1).unwrap(),
        Window::new(0.0, 4.0).unwrap(),
        EXP1,
        vec![vec![3.0], vec![0.5, 2.0]],
        &[(0, 1, 1.0, 0.5)],
    )
    .unwrap()
}

#[test]
fn census_on_hand_system() {
    let c = generation_census(&h1(), 1.0, 0).unwrap();
    assert_eq!(c.intervals, vec![1, 1]);
    assert_eq!(c.arrows, vec![1, 0]);
    assert_eq!(c.total, 2);
    let c0 = generation_census(&h1(), 0.0, 0).unwrap();
    assert_eq!(c0.intervals, vec![1]);
}

#[test]
fn census_has_no_empty_generation_gaps() {
    let setup = SurvivalSetup::new(EXP1, 1, 15, 15.0, 1.5);
    for i in 0..100 {
        let sys = setup.build(i).unwrap();
        let c = generation_census(&sys, 1.5, setup.origin(&sys)).unwrap();
        assert!(c.intervals.iter().all(|&k| k > 0), "{c:?}");
        assert_eq!(c.intervals.iter().sum::<u64>(), c.total);
        // every generation g+1 interval was created by an arrow out of generation g
        for g in 0..c.intervals.len() - 1 {
            assert!(c.intervals[g + 1] <= c.arrows[g]);
        }
    }
}

#[test]
fn lambda_c_impossible_thresholds_are_unresolved() {
    let setup = SurvivalSetup::new(EXP1, 1, 10, 10.0, 2.0);
    let b = estimate_lambda_c(&setup, 50, 0.0, 1.0, 6, 1).unwrap();
    assert_eq!(b.status, BracketStatus::Unresolved);
    assert!(matches!(
        b.require_resolved(),
        Err(Error::BracketNotFound { .. })
    ));
}

#[test]
fn lambda_c_degenerate_for_long_gaps() {
    let law = InterarrivalLaw::ShiftedPareto {
        alpha: 5.0,
        scale: 100.0,
    };
    let setup = SurvivalSetup::new(law, 1, 20, 20.0, 1.0);
    let b = estimate_lambda_c(&setup, 400, 0.01, 0.2, 8, 2).unwrap();
    assert_eq!(b.status, BracketStatus::Degenerate);
    assert_eq!(b.probes.len(), 1);
    assert_eq!(b.lam_hi, Some(0.0));
}

#[test]
fn lambda_c_bracket_exceeds_branching_rate() {
    let setup = SurvivalSetup::new(EXP1, 1, 40, 40.0, 4.0);
    // n > 385 so that 0 successes certifies a rate below 0.01
    let b = estimate_lambda_c(&setup, 500, 0.01, 0.2, 8, 4).unwrap();
    let (lo, hi) = b.require_resolved().unwrap();
    assert!(lo < hi);
    assert!(hi > 0.25, "{b:?}");
    let lambdas: Vec<f64> = b.probes.iter().map(|p| p.lambda).collect();
    let mut sorted = b.probes.clone();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    assert!(
        sorted
            .windows(2)
            .all(|w| w[0].estimate.mean <= w[1].estimate.mean),
        "{lambdas:?}"
    );
}

fn small_event_setup(law: InterarrivalLaw) -> EventSetup {
    EventSetup {
        law,
        lattice: Lattice::line(0, 3).unwrap(),
        horizon: Window::new(0.0, 30.0).unwrap(),
    }
}

#[test]
fn fkg_same_event_is_nonnegative() {
    let rect = SpaceTimeRect::interval(0, 3, 0.0, 30.0).unwrap();
    let a = EventSpec::Temporal { rect };
    let r = check_fkg(&small_event_setup(PARETO15), 0.5, &a, &a, 500, 4).unwrap();
    let p = r.p_a.mean;
    assert!((r.covariance.value - (p - p * p)).abs() < 1e-12);
    assert!(!r.violation);
}

#[test]
fn fkg_independent_timelines() {
    let a = EventSpec::MarkFree {
        site: 0,
        lo: 0.0,
        hi: 2.0,
    };
    let b = EventSpec::MarkFree {
        site: 2,
        lo: 0.0,
        hi: 2.0,
    };
    let r = check_fkg(&small_event_setup(PARETO15), 0.0, &a, &b, 4000, 6).unwrap();
    assert!(
        r.covariance.ci_lo <= 0.0 && 0.0 <= r.covariance.ci_hi,
        "{r:?}"
    );
    assert!(r.p_a.mean > 0.1);
}

#[test]
fn fkg_rejects_increasing_hazard() {
    let a = EventSpec::MarkFree {
        site: 0,
        lo: 0.0,
        hi: 1.0,
    };
    let law = InterarrivalLaw::Uniform { b: 2.0 };
    assert!(matches!(
        check_fkg(&small_event_setup(law), 0.5, &a, &a, 10, 1),
        Err(Error::NotDecreasingHazard(_))
    ));
}

fn chain_params() -> crate::reachability::DiagonalParams {
    crate::reachability::DiagonalParams {
        c: 2.0 / 3.0,
        eps: 2.0,
        l: 4,
        t: 32.0,
        v: 0.0,
    }
}

#[test]
fn build_chain_trivial_cases() {
    let r0 = check_build_chain(&PARETO2, 0.3, 0, &chain_params(), 300, 9).unwrap();
    assert_eq!(r0.p_all, r0.p_each[0]);
    assert_eq!(r0.vs_power.value, 0.0);
    assert!(r0.p_temporal.is_none() && !r0.violation);
    let rz = check_build_chain(&PARETO2, 0.0, 2, &chain_params(), 200, 9).unwrap();
    assert!(rz.p_each.iter().all(|e| e.mean == 0.0));
    assert!(!rz.violation);
}

#[test]
fn early_stop_agrees_with_built_trains() {
    let params = MultiscaleParams::new(0.5, 3);
    for n in [6u32, 8] {
        let width = params.width(n);
        let lattice = Lattice::line(0, width).unwrap();
        let mut hits = 0;
        for i in 0..300 {
            let s = replicate_seed(17, i);
            let horizon = Window::new(0.0, 2f64.powi(n as i32)).unwrap();
            let sys = build_harris(
                &lattice,
                horizon,
                &PARETO2,
                0.0,
                s,
                &BuildOptions::default(),
            )
            .unwrap();
            let direct =
                stopping_index(sys.trains(), n, params.k).is_some_and(|t| t <= 1 << params.k);
            assert_eq!(direct, early_stop(&PARETO2, n, &params, s), "n {n} rep {i}");
            hits += direct as u32;
        }
        assert!(hits > 0);
    }
}

#[test]
fn dense_marks_rarely_stop_early() {
    let law = InterarrivalLaw::Exponential { rate: 100.0 };
    let lattice = Lattice::line(0, 8).unwrap();
    for seed in 0..50 {
        let sys = build_harris(
            &lattice,
            Window::new(0.0, 64.0).unwrap(),
            &law,
            0.0,
            seed,
            &BuildOptions::default(),
        )
        .unwrap();
        // blocks of length 8
        assert!(stopping_index(sys.trains(), 6, 3).is_none_or(|t| t > 8));
    }
}

#[test]
fn gap_frequency_matches_independent_sampler() {
    let n = 10_000u64;
    let ours = (0..n)
        .filter(|&i| {
            let mut rng = stream_rng(replicate_seed(21, i), Stream::Train(0));
            let t = sample_train(&EXP1, 0.0, 100.0, &mut rng).unwrap();
            detect_gap(&t, 0.0, 100.0, 10.0)
        })
        .count() as f64
        / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let exp = Exp::new(1.0).unwrap();
    let theirs = (0..n)
        .filter(|_| {
            let (mut prev, mut longest) = (0.0f64, 0.0f64);
            loop {
                let next = prev + exp.sample(&mut rng);
                if next > 100.0 {
                    longest = longest.max(100.0 - prev);
                    break;
                }
                longest = longest.max(next - prev);
                prev = next;
            }
            longest >= 10.0
        })
        .count() as f64
        / n as f64;
    let se = (ours * (1.0 - ours) / n as f64 + theirs * (1.0 - theirs) / n as f64).sqrt();
    assert!((ours - theirs).abs() < 3.0 * se, "{ours} vs {theirs}");
    assert!(ours > 0.0 && ours < 1.0);
}

#[test]
fn exponential_gap_frequencies_collapse() {
    let params = MultiscaleParams::new(0.5, 3);
    let scan = estimate_gap_prob(&params, &EXP1, &[4, 5, 6], 4000, 3).unwrap();
    assert!(scan.slope.unwrap() < -2.0, "{scan:?}");
    assert!(!scan.censored);
    let cen = estimate_gap_prob(&params, &EXP1, &[4, 8], 200, 3).unwrap();
    assert!(cen.censored);
    assert!(matches!(
        estimate_gap_prob(&MultiscaleParams::new(0.6, 3), &PARETO15, &[8], 10, 1),
        Err(Error::ParameterDomain(_))
    ));
}

#[test]
fn pr_at_zero_rate_is_mark_free_timeline() {
    let params = MultiscaleParams::new(0.5, 3);
    let r = 4;
    let n = 400;
    let policy = StartPolicy::UniformOffset { width: 4.0 };
    let est = estimate_pr(&params, &PARETO2, &[0.0], r, &[policy.clone()], n, 13).unwrap();
    let width = params.width(r);
    let opts = BuildOptions {
        start_policy: policy,
        ..Default::default()
    };
    let free = (0..n)
        .filter(|&i| {
            let sys = build_harris(
                &Lattice::line(0, width).unwrap(),
                Window::new(0.0, 16.0).unwrap(),
                &PARETO2,
                0.0,
                replicate_seed(13, i),
                &opts,
            )
            .unwrap();
            sys.trains()
                .iter()
                .any(|t| t.marks_in(0.0, 16.0).is_empty())
        })
        .count() as u64;
    assert_eq!(est[0].best().successes(), free);
}

#[test]
fn pr_flags_are_coupled() {
    let params = MultiscaleParams::new(0.5, 3);
    let flags = crossing_flags(
        &params,
        &PARETO2,
        &[0.2, 0.6, 1.2],
        5,
        &StartPolicy::AllAtZero,
        200,
        8,
    )
    .unwrap();
    for f in flags {
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let setup = SurvivalSetup::new(EXP1, 1, 10, 10.0, 1.0);
    let run = || estimate_survival(&setup, &[0.4, 1.0], 64, 77).unwrap();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(serial, parallel);
    assert_eq!(run(), run());
}
