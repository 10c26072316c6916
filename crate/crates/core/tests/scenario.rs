use std::fs;

use reram_fsa::scenario::{
    run_krinsky_scenario, run_montecarlo, run_simulate, FailureKind, ScenarioConfig,
};
use reram_fsa::Execution;

fn field<'a>(summary: &'a str, key: &str) -> &'a str {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("{key} missing from summary:\n{summary}"))
}

#[test]
fn two_step_workload_costs_table_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        ScenarioConfig::from_json(r#"{"workload":{"transitions":[["S0","S1"],["S1","S2"]]}}"#)
            .unwrap();
    let out = run_simulate(&cfg, dir.path()).unwrap();
    assert_eq!(field(&out.summary, "final_state"), "S2");
    let e: f64 = field(&out.summary, "total_energy_pJ").parse().unwrap();
    assert!((e - (1.74 + 8.2)).abs() < 1e-9);
    let ledger = fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    assert!(ledger.contains("S1->S0->S2,2,8.2,300"));
}

#[test]
fn broken_chain_is_a_config_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        ScenarioConfig::from_json(r#"{"workload":{"transitions":[["S0","S1"],["S2","S3"]]}}"#)
            .unwrap();
    let f = run_simulate(&cfg, dir.path()).unwrap_err();
    assert_eq!((f.kind, f.exit_code()), (FailureKind::Config, 1));
}

#[test]
fn effective_config_reproduces_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_json(
        r#"{"seed": 9, "krinsky": {"reward_a": 0.7, "reward_b": 0.3, "steps": 300}}"#,
    )
    .unwrap();
    run_krinsky_scenario(&cfg, a.path()).unwrap();
    let dumped = ScenarioConfig::load(&a.path().join("effective_config.json")).unwrap();
    assert_eq!(dumped, cfg);
    run_krinsky_scenario(&dumped, b.path()).unwrap();
    for f in [
        "trajectory.csv",
        "ledger.csv",
        "summary.txt",
        "effective_config.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn montecarlo_files_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.montecarlo.trials = 400;
    run_montecarlo(&cfg, a.path(), Execution::Parallel).unwrap();
    run_montecarlo(&cfg, b.path(), Execution::Sequential).unwrap();
    assert_eq!(
        fs::read(a.path().join("detection.csv")).unwrap(),
        fs::read(b.path().join("detection.csv")).unwrap()
    );
}
