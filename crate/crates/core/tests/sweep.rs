mod common;

use edgecache::config::ScenarioTemplate;
use edgecache::policies::PolicyKind;
use edgecache::sweep::{
    binary_count, check_tractable, emit_csv, format_sig6, parse_policies, run_policy, run_sweep, to_csv, Axis, Evaluation,
    Policy, SweepResult, SweepSpec, CENTRALIZED_MAX_BINARIES,
};
use edgecache::Error;

use common::generated;

fn spec(axis: Axis, values: Vec<f64>, policies: &str, repetitions: usize) -> SweepSpec {
    SweepSpec {
        axis,
        values,
        fixed: ScenarioTemplate { node_count: 3, content_count: 12, ..Default::default() }.with_capacity_gb(0.6),
        policies: parse_policies(policies).unwrap(),
        repetitions,
        base_seed: 7,
        per_node: false,
        evaluation: Evaluation::default(),
    }
}

#[test]
fn six_significant_digits() {
    assert_eq!(format_sig6(0.0), "0");
    assert_eq!(format_sig6(177.777777), "177.778");
    assert_eq!(format_sig6(1.0), "1");
    assert_eq!(format_sig6(0.65), "0.65");
    assert_eq!(format_sig6(-2.5), "-2.5");
    assert_eq!(format_sig6(123456.7), "123457");
    assert_eq!(format_sig6(1234567.0), "1.23457e6");
    assert_eq!(format_sig6(0.000012345678), "0.0000123457");
    assert_eq!(format_sig6(1.5e-7), "1.5e-7");
}

#[test]
fn empty_result_is_header_only() {
    let empty = SweepResult { axis: Axis::Capacity, per_node: false, rows: vec![] };
    let text = to_csv(&empty).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("axis,axis_value,policy,repetition,seed,objective"));
}

#[test]
fn one_line_per_row_and_stable_bytes() {
    let result = run_sweep(&spec(Axis::Capacity, vec![0.3, 0.6], "greedy", 1)).unwrap();
    assert_eq!(result.rows.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    emit_csv(&result, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    assert_eq!(String::from_utf8(first.clone()).unwrap().lines().count(), 3);
    emit_csv(&result, &path).unwrap();
    assert_eq!(first, std::fs::read(&path).unwrap());
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let s = spec(Axis::ContentCount, vec![6.0, 9.0], "greedy,most-foa,guaranteed-greedy,locally-optimal,distributed", 3);
    let a = to_csv(&run_sweep(&s).unwrap()).unwrap();
    let b = to_csv(&run_sweep(&s).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 5 * 3);
}

#[test]
fn rows_follow_value_policy_repetition_order() {
    let result = run_sweep(&spec(Axis::MenCount, vec![2.0, 3.0], "distributed,greedy", 2)).unwrap();
    let keys: Vec<(f64, &str, usize, u64)> =
        result.rows.iter().map(|r| (r.axis_value, r.policy.name(), r.repetition, r.seed)).collect();
    assert_eq!(
        keys,
        vec![
            (2.0, "distributed", 0, 7),
            (2.0, "distributed", 1, 8),
            (2.0, "greedy", 0, 7),
            (2.0, "greedy", 1, 8),
            (3.0, "distributed", 0, 7),
            (3.0, "distributed", 1, 8),
            (3.0, "greedy", 0, 7),
            (3.0, "greedy", 1, 8),
        ]
    );
    assert!(result.rows.iter().all(|r| r.node_delays.len() == r.axis_value as usize));
}

#[test]
fn per_node_columns() {
    let mut s = spec(Axis::Capacity, vec![0.5], "most-foa", 1);
    s.per_node = true;
    let text = to_csv(&run_sweep(&s).unwrap()).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with("node_delay_1,node_delay_2,node_delay_3"));
}

#[test]
fn policies_share_each_instance() {
    // Every policy at one axis value and repetition sees the same scenario,
    // so the oracle lower-bounds all cooperative scores there.
    let s = SweepSpec {
        fixed: ScenarioTemplate { node_count: 2, content_count: 6, ..Default::default() }.with_capacity_gb(0.4),
        ..spec(Axis::Capacity, vec![0.3, 0.5], "oracle,distributed,centralized", 2)
    };
    let result = run_sweep(&s).unwrap();
    for value in [0.3, 0.5] {
        for rep in 0..2 {
            let row = |p: Policy| result.rows.iter().find(|r| r.axis_value == value && r.repetition == rep && r.policy == p).unwrap();
            let best = row(Policy::Oracle).objective;
            assert!(row(Policy::Distributed).objective >= best - 1e-9);
            assert!(row(Policy::Centralized).objective >= best - 1e-9);
        }
    }
}

#[test]
fn invalid_specs_are_rejected() {
    for bad in [
        spec(Axis::Capacity, vec![], "greedy", 1),
        spec(Axis::Capacity, vec![1.0, 1.0], "greedy", 1),
        spec(Axis::Capacity, vec![2.0, 1.0], "greedy", 1),
        spec(Axis::Capacity, vec![1.0], "greedy", 0),
        spec(Axis::Capacity, vec![-1.0], "greedy", 1),
        spec(Axis::ContentCount, vec![2.5], "greedy", 1),
        spec(Axis::MenCount, vec![1.0], "greedy", 1),
    ] {
        assert!(matches!(run_sweep(&bad), Err(Error::InvalidSweep(_))));
    }
    assert!(parse_policies("").is_err());
    assert!(parse_policies("greedy,bogus").is_err());
    assert!("diagonal".parse::<Axis>().is_err());
}

#[test]
fn large_centralized_requests_are_refused() {
    let s = generated(5, 400, 10.0, 0);
    assert!(binary_count(&s) > CENTRALIZED_MAX_BINARIES);
    assert!(matches!(check_tractable(&s), Err(Error::Intractable(_))));
    assert!(matches!(run_policy(&s, Policy::Centralized, &Evaluation::default()), Err(Error::Intractable(_))));
    let sweep = SweepSpec { fixed: ScenarioTemplate { content_count: 400, ..Default::default() }, ..spec(Axis::Capacity, vec![1.0], "centralized", 1) };
    assert!(matches!(run_sweep(&sweep), Err(Error::Intractable(_))));
}

#[test]
fn baselines_use_the_noncooperative_score_unless_asked() {
    let s = generated(4, 20, 1.0, 2);
    let policy = Policy::Baseline(PolicyKind::MostFoa);
    let plain = run_policy(&s, policy, &Evaluation::default()).unwrap();
    let coop = run_policy(&s, policy, &Evaluation { cooperative_baselines: true, ..Evaluation::default() }).unwrap();
    assert_eq!(plain.placement, coop.placement);
    assert_eq!(coop.objective, s.total_average_delay(&coop.placement).unwrap());
    assert_eq!(plain.objective, edgecache::policies::noncooperative_delay(&s, &plain.placement).unwrap());
}
