mod common;

use approx::assert_abs_diff_eq;
use edgecache::distributed::{local_optimal_placement, noncooperative_request_delay};
use edgecache::policies::{noncooperative_delay, noncooperative_node_delays, place, place_with, PolicyKind, PolicyOptions};
use edgecache::{Placement, Scenario};
use proptest::prelude::*;

use common::{generated, pair, two_node};

fn cached(p: &Placement, n: usize) -> Vec<usize> {
    (0..p.content_count()).filter(|&i| p.get(n, i)).collect()
}

#[test]
fn greedy_takes_smallest_first() {
    let s = pair(&[100.0, 200.0, 300.0], 300.0, &[0.2, 0.3, 0.5]);
    let p = place(&s, PolicyKind::Greedy);
    assert_eq!(cached(&p, 0), vec![0, 1]);
    assert_eq!(cached(&p, 1), vec![0, 1]);
}

#[test]
fn most_foa_takes_most_popular_first() {
    let s = pair(&[300.0, 100.0, 100.0], 300.0, &[0.5, 0.3, 0.2]);
    let p = place(&s, PolicyKind::MostFoa);
    assert_eq!(cached(&p, 0), vec![0]);
    assert_eq!(cached(&p, 1), vec![0]);
}

#[test]
fn names_round_trip() {
    for kind in PolicyKind::ALL {
        assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        assert_eq!(kind.to_string(), kind.name());
    }
    assert_eq!("most_foa".parse::<PolicyKind>().unwrap(), PolicyKind::MostFoa);
    assert!("fastest".parse::<PolicyKind>().is_err());
}

#[test]
fn two_node_locally_optimal_noncooperative_delay() {
    let s = two_node();
    let p = place(&s, PolicyKind::LocallyOptimal);
    // MEN: content 1 via the BS, content 2 local. BS: content 1 local,
    // content 2 from the content server.
    let expected = 0.5 * (80.0 + 800.0 / 45.0) + 0.5 * 80.0 + 0.5 * 80.0 + 0.5 * (80.0 + 800.0 / 60.0);
    assert_abs_diff_eq!(noncooperative_delay(&s, &p).unwrap(), expected, epsilon = 1e-9);
    assert_abs_diff_eq!(expected, 175.56, epsilon = 5e-3);
}

fn case1_sum(s: &Scenario) -> f64 {
    (0..s.node_count()).flat_map(|n| (0..s.content_count()).map(move |i| (n, i))).map(|(n, i)| s.weight(n, i) * s.d_alpha(n, i)).sum()
}

#[test]
fn everything_cached_is_the_case1_sum() {
    let s = pair(&[100.0, 150.0], 250.0, &[0.4, 0.6]);
    let all = Placement::from_matrix(&[&[1, 1], &[1, 1]]);
    assert_abs_diff_eq!(noncooperative_delay(&s, &all).unwrap(), case1_sum(&s), epsilon = 1e-9);
    assert_abs_diff_eq!(s.total_average_delay(&all).unwrap(), case1_sum(&s), epsilon = 1e-9);
}

#[test]
fn nothing_cached_is_the_content_server_sum() {
    let s = generated(4, 7, 1.0, 5);
    let empty = Placement::empty(4, 7);
    let expected: f64 =
        (0..4).flat_map(|n| (0..7).map(move |i| (n, i))).map(|(n, i)| s.weight(n, i) * s.d_delta(n, i)).sum();
    assert_abs_diff_eq!(noncooperative_delay(&s, &empty).unwrap(), expected, epsilon = 1e-9);
    let per_node: f64 = noncooperative_node_delays(&s, &empty).iter().sum();
    assert_abs_diff_eq!(per_node, expected, epsilon = 1e-9);
}

#[test]
fn overfull_placement_is_rejected() {
    let s = two_node();
    assert!(noncooperative_delay(&s, &Placement::from_matrix(&[&[1, 1], &[0, 0]])).is_err());
}

/// Rows of one node that fit its capacity.
fn feasible_rows(s: &Scenario, n: usize) -> Vec<Vec<bool>> {
    let i = s.content_count();
    (0u32..(1 << i))
        .map(|mask| (0..i).map(|k| mask >> k & 1 == 1).collect::<Vec<bool>>())
        .filter(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| s.size(k)).sum::<f64>() <= s.capacity(n) + 1e-9)
        .collect()
}

fn node_noncoop(s: &Scenario, p: &Placement, n: usize) -> f64 {
    (0..s.content_count()).map(|i| s.weight(n, i) * noncooperative_request_delay(s, p, n, i)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn greedy_caches_the_most_contents(seed in 0u64..10_000, contents in 1usize..11, gb in 0.0f64..1.5) {
        let s = generated(3, contents, gb, seed);
        let p = place(&s, PolicyKind::Greedy);
        prop_assert!(s.check_placement(&p).is_ok());
        for n in 0..3 {
            let most = feasible_rows(&s, n).iter().map(|r| r.iter().filter(|&&b| b).count()).max().unwrap();
            prop_assert_eq!(p.cached_count(n), most);
        }
    }

    #[test]
    fn locally_optimal_rows_are_best_responses(seed in 0u64..10_000, contents in 1usize..10, gb in 0.0f64..1.2) {
        let s = generated(3, contents, gb, seed);
        let p = place(&s, PolicyKind::LocallyOptimal);
        let bs = s.bs();
        // The BS row minimizes the base station's own delay ...
        let own = node_noncoop(&s, &p, bs);
        for row in feasible_rows(&s, bs) {
            let mut q = Placement::empty(s.node_count(), s.content_count());
            q.set_row(bs, &row);
            prop_assert!(own <= node_noncoop(&s, &q, bs) + 1e-9);
        }
        // ... and each MEN row is optimal given that row.
        for n in 0..bs {
            let mine = node_noncoop(&s, &p, n);
            for row in feasible_rows(&s, n) {
                let mut q = p.clone();
                q.set_row(n, &row);
                prop_assert!(mine <= node_noncoop(&s, &q, n) + 1e-9);
            }
        }
    }

    #[test]
    fn guaranteed_greedy_keeps_a_constant_fraction(seed in 0u64..10_000, contents in 2usize..9, gb in 0.1f64..1.2) {
        let s = generated(3, contents, gb, seed);
        let empty = noncooperative_delay(&s, &Placement::empty(3, contents)).unwrap();
        let exact = empty - noncooperative_delay(&s, &local_optimal_placement(&s, None)).unwrap();
        for per_node_greedy in [false, true] {
            let p = place_with(&s, PolicyKind::GuaranteedGreedy, PolicyOptions { per_node_greedy });
            prop_assert!(s.check_placement(&p).is_ok());
            let got = empty - noncooperative_delay(&s, &p).unwrap();
            prop_assert!(got >= (1.0 - (-1.0f64).exp()) * exact - 1e-9);
        }
    }

    #[test]
    fn cooperation_never_slows_a_men(seed in 0u64..10_000, contents in 1usize..8, gb in 0.0f64..1.0) {
        let s = generated(4, contents, gb, seed);
        for kind in PolicyKind::ALL {
            let p = place(&s, kind);
            let coop = s.node_delays(&p);
            let non = noncooperative_node_delays(&s, &p);
            for n in 0..s.bs() {
                prop_assert!(coop[n] <= non[n] + 1e-9);
            }
        }
    }

    #[test]
    fn policies_are_deterministic(seed in 0u64..10_000, contents in 1usize..30) {
        let s = generated(4, contents, 1.0, seed);
        for kind in PolicyKind::ALL {
            prop_assert_eq!(place(&s, kind), place(&s, kind));
        }
    }
}
