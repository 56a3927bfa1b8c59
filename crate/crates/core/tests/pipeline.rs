use pet_core::algorithms::{pet_run, PetConfig, RunTrace};
use pet_core::harness::{run_campaign, run_trial, ExperimentConfig};
use pet_core::{correct_answer, ProblemInstance, RandomSource, Task};

const CONFIG: &str = r#"{
  "task": "topk:2",
  "instance": {"means": [0.9, 0.2, 0.5, 0.0]},
  "delta": 0.05,
  "algorithms": [{"name": "pet"}, {"name": "round_robin", "checkpoint_base": 40}, {"name": "batched_tas", "checkpoint_base": 40}],
  "trials": 12,
  "master_seed": 99
}"#;

#[test]
fn replayed_trials_match_the_campaign() {
    let cfg = ExperimentConfig::from_json(CONFIG).unwrap();
    let campaign = run_campaign(&cfg, Some(2)).unwrap();
    for trial in [0, 5, 11] {
        let replay = run_trial(&cfg, trial).unwrap();
        let original = &campaign.trials[trial as usize];
        assert_eq!(replay.means, original.means);
        for (a, b) in replay.records.iter().zip(&original.records) {
            assert!(a.same_outcome(b), "trial {trial}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn campaign_runs_are_correct_and_complete() {
    let cfg = ExperimentConfig::from_json(CONFIG).unwrap();
    let campaign = run_campaign(&cfg, None).unwrap();
    assert!(!campaign.any_incomplete());
    for j in 0..cfg.algorithms.len() {
        let errors = campaign.records(j).filter(|r| !r.correct).count();
        assert!(errors <= 1, "{} made {errors} errors", campaign.labels()[j]);
    }
}

#[test]
fn pet_trace_accounts_for_every_sample() {
    let task = Task::TopK { k: 1 };
    let inst = ProblemInstance::new(vec![1.0, 0.6, 0.4], 1.0).unwrap();
    let cfg = PetConfig::new(1.0, 0.01).unwrap();
    let rec = pet_run(task, &inst, &cfg, RandomSource::new(3, 0)).unwrap();
    assert_eq!(rec.answer, correct_answer(task, &inst).unwrap());
    let RunTrace::Phases(phases) = &rec.trace else {
        panic!("PET records phases");
    };
    let pulled: u64 = phases
        .iter()
        .map(|p| p.explore_pulls.iter().chain(&p.tracking_pulls).sum::<u64>())
        .sum();
    assert_eq!(pulled, rec.samples);
    assert_eq!(phases.last().unwrap().samples_after_phase, rec.samples);
    assert!(phases.last().unwrap().stopped);
}
