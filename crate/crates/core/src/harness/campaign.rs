//! Seeded Monte Carlo campaigns.
//!
//! Trial `i` draws its instance from stream slot 0 and runs algorithm `j`
//! on slot `j + 1`, so every trial replays in isolation and the results do
//! not depend on how trials are spread over workers.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use super::config::{AlgorithmSpec, ExperimentConfig};
use crate::algorithms::{batched_tas_run, pet_run, round_robin_run, RunRecord};
use crate::error::Result;
use crate::rng::{RandomSource, SLOTS_PER_TRIAL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub means: Vec<f64>,
    /// One record per configured algorithm, in config order.
    pub records: Vec<RunRecord>,
}

/// Stream id used by algorithm `index` in trial `trial`.
pub fn algorithm_stream(trial: u64, index: usize) -> u64 {
    trial * SLOTS_PER_TRIAL + index as u64 + 1
}

pub fn run_algorithm(cfg: &ExperimentConfig, spec: &AlgorithmSpec, index: usize, trial: u64) -> Result<RunRecord> {
    let inst = cfg.instance_for_trial(trial)?;
    let source = RandomSource::for_trial(cfg.master_seed, trial, index as u64 + 1);
    match spec {
        AlgorithmSpec::Pet { .. } => pet_run(cfg.task, &inst, &spec.pet_config(cfg.delta).expect("pet spec"), source),
        AlgorithmSpec::RoundRobin { .. } => {
            round_robin_run(cfg.task, &inst, &spec.baseline_config(cfg.delta).expect("baseline spec"), source)
        }
        AlgorithmSpec::BatchedTas { .. } => {
            batched_tas_run(cfg.task, &inst, &spec.baseline_config(cfg.delta).expect("baseline spec"), source)
        }
    }
}

pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    let records = cfg
        .algorithms
        .iter()
        .enumerate()
        .map(|(j, spec)| run_algorithm(cfg, spec, j, trial))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialResult {
        trial,
        means: cfg.instance.means_for_trial(cfg.master_seed, trial),
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub config: ExperimentConfig,
    /// Sorted by trial index.
    pub trials: Vec<TrialResult>,
}

/// Runs every trial on a pool of `workers` threads (`None`: one per core).
pub fn run_campaign(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Campaign> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| crate::Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let mut trials = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t))
            .collect::<Result<Vec<_>>>()
    })?;
    trials.sort_by_key(|t| t.trial);
    Ok(Campaign {
        config: cfg.clone(),
        trials,
    })
}

impl Campaign {
    pub fn labels(&self) -> Vec<String> {
        self.config.algorithms.iter().map(AlgorithmSpec::label).collect()
    }

    pub fn records(&self, index: usize) -> impl Iterator<Item = &RunRecord> {
        self.trials.iter().map(move |t| &t.records[index])
    }

    pub fn any_incomplete(&self) -> bool {
        self.trials.iter().flat_map(|t| &t.records).any(|r| r.incomplete)
    }

    /// One row per (trial, algorithm). Contains no timing, so it is reproducible byte for byte.
    pub fn to_csv(&self) -> String {
        let labels = self.labels();
        let mut out = String::from("trial,algorithm,correct,samples,batches,phases,seed\n");
        for t in &self.trials {
            for (j, rec) in t.records.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    t.trial,
                    labels[j],
                    rec.correct,
                    rec.samples,
                    rec.batches,
                    rec.trace.len(),
                    algorithm_stream(t.trial, j)
                )
                .expect("writing to a String cannot fail");
            }
        }
        out
    }

    pub fn summary(&self) -> BenchSummary {
        let algorithms = self
            .labels()
            .into_iter()
            .enumerate()
            .map(|(j, label)| AlgorithmSummary::from_records(label, self.config.algorithms[j].clone(), self.records(j)))
            .collect();
        BenchSummary {
            name: self.config.name.clone(),
            task: self.config.task.to_string(),
            delta: self.config.delta,
            sigma2: self.config.sigma2,
            trials: self.config.trials,
            master_seed: self.config.master_seed,
            algorithms,
            instances: self
                .trials
                .iter()
                .map(|t| TrialInstance {
                    trial: t.trial,
                    means: t.means.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Distribution {
    pub fn from_values(values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut data = Data::new(values);
        Self {
            mean,
            median: data.median(),
            q25: data.quantile(0.25),
            q75: data.quantile(0.75),
            q95: data.quantile(0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub label: String,
    pub spec: AlgorithmSpec,
    pub runs: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub incomplete: u64,
    pub samples: Distribution,
    pub batches: Distribution,
    pub mean_wall_clock_secs: f64,
}

impl AlgorithmSummary {
    pub fn from_records<'a>(label: String, spec: AlgorithmSpec, records: impl Iterator<Item = &'a RunRecord>) -> Self {
        let records: Vec<&RunRecord> = records.collect();
        let runs = records.len() as u64;
        let errors = records.iter().filter(|r| !r.correct).count() as u64;
        Self {
            label,
            spec,
            runs,
            errors,
            error_rate: errors as f64 / runs as f64,
            incomplete: records.iter().filter(|r| r.incomplete).count() as u64,
            samples: Distribution::from_values(records.iter().map(|r| r.samples as f64).collect()),
            batches: Distribution::from_values(records.iter().map(|r| r.batches as f64).collect()),
            mean_wall_clock_secs: records.iter().map(|r| r.wall_clock.as_secs_f64()).sum::<f64>() / runs as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialInstance {
    pub trial: u64,
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub task: String,
    pub delta: f64,
    pub sigma2: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub algorithms: Vec<AlgorithmSummary>,
    pub instances: Vec<TrialInstance>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::InstanceSpec;
    use crate::instance::Task;

    fn config(trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            name: None,
            task: Task::bai(),
            instance: InstanceSpec::fixed(vec![1.0, 0.4, 0.3]),
            sigma2: 1.0,
            delta: 0.1,
            algorithms: vec![AlgorithmSpec::pet(1.0), AlgorithmSpec::round_robin()],
            trials,
            master_seed: 99,
            t_min: 1.0,
            outputs: Default::default(),
        }
    }

    #[test]
    fn single_trial_summary_is_the_record() {
        let cfg = config(1);
        let campaign = run_campaign(&cfg, Some(1)).unwrap();
        let summary = campaign.summary();
        for (j, alg) in summary.algorithms.iter().enumerate() {
            let rec = &campaign.trials[0].records[j];
            let s = rec.samples as f64;
            let b = rec.batches as f64;
            assert_eq!(alg.samples, Distribution { mean: s, median: s, q25: s, q75: s, q95: s });
            assert_eq!(alg.batches.mean, b);
            assert_eq!(alg.batches.median, b);
            assert_eq!(alg.error_rate, if rec.correct { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn csv_is_reproducible_across_workers() {
        let cfg = config(12);
        let a = run_campaign(&cfg, Some(1)).unwrap().to_csv();
        let b = run_campaign(&cfg, Some(4)).unwrap().to_csv();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1 + 24);
        assert!(a.starts_with("trial,algorithm,correct,samples,batches,phases,seed\n0,pet,"));
    }

    #[test]
    fn trial_replays_alone() {
        let cfg = config(5);
        let campaign = run_campaign(&cfg, Some(2)).unwrap();
        let alone = run_trial(&cfg, 3).unwrap();
        for (a, b) in alone.records.iter().zip(&campaign.trials[3].records) {
            assert!(a.same_outcome(b));
        }
    }

    #[test]
    fn quantiles_of_known_values() {
        let d = Distribution::from_values((1..=5).map(f64::from).collect());
        assert_eq!(d.mean, 3.0);
        assert_eq!(d.median, 3.0);
        assert!(d.q25 <= 2.0 && d.q75 >= 4.0 && d.q95 <= 5.0);
    }
}
