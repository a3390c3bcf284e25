mod common;

use dcg_core::distributed::ConsensusRounds;
use dcg_core::experiment::{
    generate_paper_scenario, records_to_csv, run_experiment, trial_utility, verify_bounds,
    NamedSequence, RunOptions, Scenario, SolverSpec, UtilitySource,
};
use dcg_core::graph::GraphSpec;
use dcg_core::rng::trial_seed;
use dcg_core::utility::{Utility, WeightedCoverage};
use dcg_core::{AgentPartition, StrategySet};

fn small(seed: u64) -> Scenario {
    let w = common::random_coverage(&mut common::rng(seed), 6, 5);
    Scenario {
        id: format!("small-{seed}"),
        master_seed: seed,
        trials: 4,
        utility: UtilitySource::Inline {
            instance: common::instance_of(&w),
        },
        agents: AgentPartition::new(&[2, 2, 2], &[1, 1, 1]).unwrap(),
        graph: GraphSpec::Ring,
        horizon: 20,
        samples: vec![20],
        consensus: ConsensusRounds::One,
        solvers: ["ds", "central", "brute", "seq"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect(),
        sequences: vec![
            NamedSequence {
                name: "a".into(),
                order: vec![0, 1, 2],
            },
            NamedSequence {
                name: "b".into(),
                order: vec![2, 1, 0],
            },
        ],
    }
}

#[test]
fn brute_force_dominates_every_solver() {
    for seed in 0..5 {
        let records = run_experiment(&small(seed), RunOptions::default()).unwrap();
        for trial in records.chunks(5) {
            let best = trial
                .iter()
                .find(|r| r.solver == "brute")
                .unwrap()
                .value
                .unwrap();
            for r in trial {
                assert!(r.error.is_none(), "{:?}", r.error);
                assert!(
                    r.value.unwrap() <= best + 1e-12,
                    "{} beat brute force",
                    r.solver
                );
            }
        }
    }
}

#[test]
fn replay_is_byte_identical() {
    let s = small(9);
    let a = records_to_csv(&run_experiment(&s, RunOptions::default()).unwrap());
    let b = records_to_csv(&run_experiment(&s, RunOptions::default()).unwrap());
    assert_eq!(a, b);
    let mut other = s.clone();
    other.master_seed += 1;
    assert_ne!(
        a,
        records_to_csv(&run_experiment(&other, RunOptions::default()).unwrap())
    );
}

#[test]
fn scenario_files_resolve_relative_instances() {
    let dir = tempfile::tempdir().unwrap();
    let w = WeightedCoverage::new(
        vec![1.0, 2.0, 3.0],
        vec![vec![0], vec![1], vec![2], vec![0, 1]],
    )
    .unwrap();
    common::instance_of(&w)
        .save(&dir.path().join("inst.json"))
        .unwrap();
    let mut s = small(1);
    s.agents = AgentPartition::new(&[2, 2], &[1, 1]).unwrap();
    s.graph = GraphSpec::Path;
    s.sequences = vec![NamedSequence {
        name: "a".into(),
        order: vec![0, 1],
    }];
    s.utility = UtilitySource::File {
        path: "inst.json".into(),
    };
    let path = dir.path().join("scenario.json");
    s.save(&path).unwrap();
    let loaded = Scenario::load(&path).unwrap();
    loaded.validate().unwrap();
    let records = run_experiment(&loaded, RunOptions::default()).unwrap();
    assert!(records.iter().all(|r| r.error.is_none()));
    assert_eq!(
        records.iter().find(|r| r.solver == "brute").unwrap().value,
        Some(5.0)
    );
}

#[test]
fn guard_failures_become_error_records() {
    let mut s = small(2);
    let w = WeightedCoverage::modular((0..60).map(|i| i as f64).collect()).unwrap();
    s.utility = UtilitySource::Inline {
        instance: common::instance_of(&w),
    };
    s.agents = AgentPartition::new(&[20, 20, 20], &[10, 10, 10]).unwrap();
    s.solvers = vec![SolverSpec::BruteForce, SolverSpec::Sequential("a".into())];
    s.trials = 1;
    let records = run_experiment(&s, RunOptions::default()).unwrap();
    assert!(records[0].error.as_deref().unwrap().contains("guard"));
    assert!(records[1].error.is_none());
    let line = records_to_csv(&records).lines().nth(1).unwrap().to_string();
    assert!(
        line.ends_with(&format!("\"{}\"", records[0].error.as_deref().unwrap())),
        "{line}"
    );
}

#[test]
fn field_metrics() {
    let s = generate_paper_scenario(4);
    let Utility::Coverage(u) = trial_utility(&s, trial_seed(4, 0)).unwrap() else {
        panic!("field scenario builds a coverage utility");
    };
    // Agent blocks start at 0, 10, 15, 18, 20; this is the distinct placement
    // with the large agent on the last five sites.
    let optimum = [5, 6, 7, 8, 9, 13, 14, 17, 19, 20];
    let set = StrategySet::from_members(22, &optimum).unwrap();
    assert!(s.agents.is_independent(&set));
    assert_eq!(u.distinct_sites(&set), 10);
    let crowded = StrategySet::from_members(22, &[0, 1, 2, 3, 4, 10, 11, 15, 18, 20]).unwrap();
    assert_eq!(u.distinct_sites(&crowded), 5);
}

#[test]
fn bound_report_on_complete_graph() {
    let mut s = small(6);
    s.graph = GraphSpec::Complete;
    s.horizon = 100;
    s.trials = 2;
    s.solvers = vec![SolverSpec::Distributed];
    let records = run_experiment(&s, RunOptions::default()).unwrap();
    let report = verify_bounds(&records, &s, 2000).unwrap();
    assert_eq!(report.checks.len(), 2);
    for c in &report.checks {
        assert!(c.fractional_ok && c.rounded_ok, "{c:?}");
        assert!((c.per_coordinate_failure - 2.0 * (-20.0f64 / 80_000.0).exp()).abs() < 1e-12);
    }
}
