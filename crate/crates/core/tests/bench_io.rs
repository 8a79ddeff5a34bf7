use relay_match::baselines::AssignmentSolver;
use relay_match::bench::{self, Algo, SweepAxis, CSV_COLUMNS};
use relay_match::ScenarioParams;

const SOLVER: AssignmentSolver = AssignmentSolver::Exhaustive;

fn csv_bytes(params: &ScenarioParams, algos: &[Algo], n: usize) -> Vec<u8> {
    let aggs = bench::run_trials(params, algos, n, SOLVER).unwrap();
    let mut buf = Vec::new();
    bench::write_csv(&bench::table_for_run(params, aggs), &mut buf).unwrap();
    buf
}

#[test]
fn repeated_runs_are_bit_identical() {
    let p = ScenarioParams { seed: 7, ..Default::default() };
    let a = bench::run_trials(&p, &Algo::ALL, 1, SOLVER).unwrap();
    let b = bench::run_trials(&p, &Algo::ALL, 1, SOLVER).unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_bytes_do_not_depend_on_thread_count() {
    let p = ScenarioParams { seed: 11, ..Default::default() };
    let algos = [Algo::DdaComplete, Algo::DdaPartial, Algo::Rmbn, Algo::Centralized];
    let parallel = csv_bytes(&p, &algos, 64);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| csv_bytes(&p, &algos, 64));
    assert_eq!(parallel, single);
}

#[test]
fn trial_seeds_are_distinct() {
    let mut seeds: Vec<u64> = (0..10_000).map(|i| bench::trial_seed(1, i)).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 10_000);
    assert_ne!(bench::trial_seed(1, 0), bench::trial_seed(2, 0));
}

#[test]
fn csv_round_trip() {
    let p = ScenarioParams::default();
    let rows = bench::sweep(&p, SweepAxis::CBar, &[1.0, 2.5], &[Algo::DdaComplete, Algo::Rmbn], 8, SOLVER).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    bench::emit_csv(&rows, &path).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 1 + rows.len());

    let back = bench::read_csv_file(&path).unwrap();
    assert_eq!(back.len(), rows.len());
    for (r, b) in rows.iter().zip(&back) {
        let m = &r.metrics;
        assert_eq!(b.scenario_id, r.scenario_id);
        assert_eq!(b.algo, m.algo);
        assert_eq!(b.axis_name, "c_bar");
        assert_eq!(b.axis_value, r.axis_value);
        assert_eq!(b.n_trials, 8);
        assert_eq!(b.p90_packets, m.p90_packets);
        for (got, want) in [
            (b.mean_sum_utility_pu, m.mean_sum_utility_pu),
            (b.mean_sum_rate_su, m.mean_sum_rate_su),
            (b.match_pct, m.match_pct),
            (b.mean_packets, m.mean_packets),
        ] {
            approx::assert_relative_eq!(got, want, max_relative = 1e-8);
        }
    }
}

#[test]
fn empty_table_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    bench::emit_csv(&[], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    assert!(bench::read_csv_file(&path).unwrap().is_empty());
}

#[test]
fn unwritable_path_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("t.csv");
    let err = bench::emit_csv(&[], &path).unwrap_err();
    assert!(err.to_string().contains("missing"), "{err}");
}

#[test]
fn single_value_sweep_matches_run() {
    let p = ScenarioParams { seed: 3, ..Default::default() };
    let algos = [Algo::DdaComplete, Algo::CentralizedSu];
    let swept = bench::sweep(&p, SweepAxis::GammaSuDb, &[p.gamma_su_db], &algos, 20, SOLVER).unwrap();
    let direct = bench::run_trials(&p, &algos, 20, SOLVER).unwrap();
    let metrics: Vec<_> = swept.iter().map(|r| r.metrics.clone()).collect();
    assert_eq!(metrics, direct);
    assert_eq!(swept[0].scenario_id, bench::scenario_id(&p));
}

#[test]
fn epsilon_sweep_ties_delta() {
    let p = SweepAxis::Epsilon.apply(&ScenarioParams::default(), 0.2).unwrap();
    assert_eq!((p.epsilon, p.delta), (0.2, 0.2));
    assert!(SweepAxis::LSu.apply(&ScenarioParams::default(), 2.5).is_err());
    assert!(bench::sweep(&p, SweepAxis::CBar, &[], &[Algo::Rmbn], 1, SOLVER).is_err());
}

#[test]
fn discrete_centralized_dominates_negotiation() {
    let p = ScenarioParams { seed: 5, ..Default::default() };
    let trials = bench::collect_trials(&p, &[Algo::DdaComplete, Algo::CentralizedDiscrete], 100, SOLVER).unwrap();
    for pair in trials.chunks(2) {
        assert_eq!(pair[0].seed, pair[1].seed);
        assert!(pair[1].sum_utility_pu + 1e-9 >= pair[0].sum_utility_pu, "seed {}", pair[0].seed);
    }
}

#[test]
fn guard_rejects_large_exhaustive_assignment() {
    let p = ScenarioParams { l_pu: 9, l_su: 9, ..Default::default() };
    let err = bench::run_trials(&p, &[Algo::Centralized], 1, SOLVER).unwrap_err();
    assert!(matches!(err, relay_match::Error::Guard { .. }), "{err}");
    assert!(bench::run_trials(&p, &[Algo::Centralized], 1, AssignmentSolver::Hungarian).is_ok());
}

#[test]
fn standard_error_shrinks_with_more_trials() {
    let p = ScenarioParams::default();
    let a = &bench::run_trials(&p, &[Algo::DdaComplete], 400, SOLVER).unwrap()[0];
    let b = &bench::run_trials(&p, &[Algo::DdaComplete], 800, SOLVER).unwrap()[0];
    let ratio = b.se_sum_utility_pu / a.se_sum_utility_pu;
    assert!((0.6..=0.85).contains(&ratio), "ratio {ratio}");
}
