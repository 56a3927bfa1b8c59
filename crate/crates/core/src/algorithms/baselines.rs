//! Checkpoint baselines: Round Robin and batched Track-and-Stop.
//!
//! Both observe rewards only at cumulative times `base * 2^r` and check the
//! GLR stopping rule there.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_inputs, is_correct, pull_batch, AlgorithmKind, RunRecord, RunTrace, MAX_EXACT_COUNT};
use crate::complexity::char_time_for_means;
use crate::error::{Error, Result};
use crate::instance::{empirical_answer, ProblemInstance, SuffStats, Task};
use crate::rng::RandomSource;
use crate::stopping::{stop_check, ThresholdParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub delta: f64,
    pub checkpoint_base: u64,
    pub max_checkpoints: u32,
}

impl BaselineConfig {
    pub const DEFAULT_CHECKPOINT_BASE: u64 = 900;
    pub const DEFAULT_MAX_CHECKPOINTS: u32 = 60;

    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            checkpoint_base: Self::DEFAULT_CHECKPOINT_BASE,
            max_checkpoints: Self::DEFAULT_MAX_CHECKPOINTS,
        }
    }

    fn validate(&self, num_arms: usize) -> Result<()> {
        if self.checkpoint_base < num_arms as u64 {
            return Err(Error::InvalidConfig(format!(
                "checkpoint_base {} is smaller than the number of arms {num_arms}",
                self.checkpoint_base
            )));
        }
        if self.max_checkpoints == 0 {
            return Err(Error::InvalidConfig("max_checkpoints must be positive".into()));
        }
        Ok(())
    }

    /// Cumulative sample count at checkpoint `r`, or `None` past exact integer range.
    pub fn checkpoint(&self, r: u32) -> Option<u64> {
        let t = self.checkpoint_base.checked_mul(1u64.checked_shl(r)?)?;
        (t as f64 <= MAX_EXACT_COUNT).then_some(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointTrace {
    pub index: u32,
    pub t: u64,
    pub pulls: Vec<u64>,
    pub counts: Vec<u64>,
    pub statistic: f64,
    pub threshold: f64,
    pub stopped: bool,
    /// Allocation tracked by the next batch (Track-and-Stop only).
    pub allocation: Option<Vec<f64>>,
}

/// Per-arm counts for `t` samples spread evenly, earlier arms taking the remainder.
fn balanced_counts(t: u64, num_arms: usize) -> Vec<u64> {
    let k = num_arms as u64;
    (0..k).map(|i| t / k + u64::from(i < t % k)).collect()
}

/// Splits `total` into integers proportional to `shares` by largest remainder,
/// ties going to the lowest index. Each part is within one of its exact share.
pub(crate) fn apportion(shares: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = shares.iter().sum();
    if !(sum > 0.0) {
        return balanced_counts(total, shares.len());
    }
    let exact: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut parts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let mut by_remainder: Vec<usize> = (0..shares.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: u64 = parts.iter().sum();
    if assigned <= total {
        for &i in by_remainder.iter().cycle().take((total - assigned) as usize) {
            parts[i] += 1;
        }
    } else {
        // Only reachable through floating-point rounding of the shares.
        let mut excess = assigned - total;
        for &i in by_remainder.iter().rev() {
            if excess == 0 {
                break;
            }
            if parts[i] > 0 {
                parts[i] -= 1;
                excess -= 1;
            }
        }
    }
    parts
}

/// Pulls that move the counts toward `w * t_next`: positive deficits scaled to the batch size.
pub(crate) fn tracking_pulls(w: &[f64], counts: &[u64], t_next: u64) -> Vec<u64> {
    let t: u64 = counts.iter().sum();
    let deficits: Vec<f64> = w
        .iter()
        .zip(counts)
        .map(|(&wi, &n)| (wi * t_next as f64 - n as f64).max(0.0))
        .collect();
    apportion(&deficits, t_next - t)
}

enum Allocator {
    Uniform,
    Tracking,
}

fn checkpoint_run(
    kind: AlgorithmKind,
    allocator: Allocator,
    task: Task,
    inst: &ProblemInstance,
    cfg: &BaselineConfig,
    mut source: RandomSource,
) -> Result<RunRecord> {
    let start = Instant::now();
    check_inputs(task, inst, cfg.delta)?;
    let k = inst.num_arms();
    cfg.validate(k)?;
    let params = ThresholdParams::new(cfg.delta, k)?;
    let sigma2 = inst.sigma2();

    let mut stats = SuffStats::new(k);
    let mut trace = Vec::new();
    let mut stopped = false;
    let mut pulls = balanced_counts(cfg.checkpoint_base, k);

    for index in 0..cfg.max_checkpoints {
        let Some(t) = cfg.checkpoint(index) else {
            break;
        };
        pull_batch(&mut stats, inst, &mut source, &pulls);
        debug_assert_eq!(stats.total(), t);
        let check = stop_check(task, &stats, sigma2, params)?;

        let next = cfg.checkpoint(index + 1);
        let mut allocation = None;
        let next_pulls = match (&allocator, next) {
            (_, None) => Vec::new(),
            (Allocator::Uniform, Some(t_next)) => balanced_counts(t_next, k)
                .iter()
                .zip(stats.counts())
                .map(|(target, n)| target - n)
                .collect(),
            (Allocator::Tracking, Some(t_next)) => {
                let w = char_time_for_means(task, &stats.means(), sigma2).w_star;
                let p = tracking_pulls(w.weights(), stats.counts(), t_next);
                allocation = Some(w.weights().to_vec());
                p
            }
        };
        trace.push(CheckpointTrace {
            index,
            t,
            pulls,
            counts: stats.counts().to_vec(),
            statistic: check.statistic,
            threshold: check.threshold,
            stopped: check.stop,
            allocation: if check.stop { None } else { allocation },
        });
        if check.stop {
            stopped = true;
            break;
        }
        pulls = next_pulls;
    }

    let answer = empirical_answer(task, &stats);
    Ok(RunRecord {
        algorithm: kind,
        correct: is_correct(task, inst, &answer),
        answer,
        samples: stats.total(),
        batches: trace.len() as u64,
        trace: RunTrace::Checkpoints(trace),
        incomplete: !stopped,
        wall_clock: start.elapsed(),
    })
}

/// Uniform sampling observed at the checkpoints, arms balanced within one pull.
pub fn round_robin_run(
    task: Task,
    inst: &ProblemInstance,
    cfg: &BaselineConfig,
    source: RandomSource,
) -> Result<RunRecord> {
    checkpoint_run(AlgorithmKind::RoundRobin, Allocator::Uniform, task, inst, cfg, source)
}

/// Track-and-Stop whose allocation `w*(mu_hat)` is refreshed only at the checkpoints.
///
/// The first batch is uniform. Each later batch splits its samples in
/// proportion to the deficits `max(0, w*_i t_next - N_i)`, so cumulative
/// counts track `w* t_next`. Degenerate empirical means give a uniform `w`.
pub fn batched_tas_run(
    task: Task,
    inst: &ProblemInstance,
    cfg: &BaselineConfig,
    source: RandomSource,
) -> Result<RunRecord> {
    checkpoint_run(AlgorithmKind::BatchedTas, Allocator::Tracking, task, inst, cfg, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::char_time;
    use proptest::prelude::*;

    fn checkpoints(rec: &RunRecord) -> &[CheckpointTrace] {
        match &rec.trace {
            RunTrace::Checkpoints(c) => c,
            RunTrace::Phases(_) => panic!("expected checkpoints"),
        }
    }

    #[test]
    fn round_robin_checkpoint_grid() {
        // Means 0.1 apart: several checkpoints before stopping.
        let inst = ProblemInstance::new(vec![0.5, 0.4, 0.3], 1.0).unwrap();
        let cfg = BaselineConfig::new(0.05);
        let rec = round_robin_run(Task::bai(), &inst, &cfg, RandomSource::new(4, 0)).unwrap();
        let cps = checkpoints(&rec);
        assert!(cps.len() >= 3);
        for (r, cp) in cps.iter().enumerate() {
            assert_eq!(cp.t, 900 << r);
            let (lo, hi) = (cp.counts.iter().min().unwrap(), cp.counts.iter().max().unwrap());
            assert!(hi - lo <= 1);
        }
        assert_eq!(rec.batches, cps.len() as u64);
        assert_eq!(rec.samples, cps.last().unwrap().t);
    }

    #[test]
    fn round_robin_easy_instance_stops_first_checkpoint() {
        let inst = ProblemInstance::new(vec![1.0, 0.0], 1.0).unwrap();
        let cfg = BaselineConfig::new(0.05);
        let first = (0..200)
            .filter(|&s| {
                let rec = round_robin_run(Task::bai(), &inst, &cfg, RandomSource::new(8, s)).unwrap();
                rec.batches == 1 && rec.correct
            })
            .count();
        assert!(first >= 198, "{first} of 200 stopped at the first checkpoint");
    }

    #[test]
    fn base_must_cover_arms() {
        let inst = ProblemInstance::new(vec![1.0, 0.0, 0.5], 1.0).unwrap();
        let cfg = BaselineConfig {
            checkpoint_base: 2,
            ..BaselineConfig::new(0.05)
        };
        assert!(round_robin_run(Task::bai(), &inst, &cfg, RandomSource::new(0, 0)).is_err());
    }

    #[test]
    fn tracking_allocation_converges() {
        // A tiny delta keeps the run going long enough to observe tracking.
        let inst = ProblemInstance::new(vec![1.0, 0.8, 0.5], 1.0).unwrap();
        let cfg = BaselineConfig::new(1e-200);
        let rec = batched_tas_run(Task::bai(), &inst, &cfg, RandomSource::new(21, 5)).unwrap();
        let cps = checkpoints(&rec);
        assert!(cps.len() >= 6, "stopped after {} checkpoints", cps.len());
        let w = char_time(Task::bai(), &inst).w_star;
        let cp = &cps[5];
        for (n, wi) in cp.counts.iter().zip(w.weights()) {
            let frac = *n as f64 / cp.t as f64;
            assert!((frac - wi).abs() <= 0.05, "N/t = {frac}, w* = {wi}");
        }
    }

    #[test]
    fn degenerate_means_give_uniform_batch() {
        let w = char_time_for_means(Task::bai(), &[0.3, 0.3, 0.3], 1.0).w_star;
        let pulls = tracking_pulls(w.weights(), &[300, 300, 300], 1800);
        assert_eq!(pulls, vec![300, 300, 300]);
    }

    #[test]
    fn tas_is_deterministic() {
        let inst = ProblemInstance::new(vec![0.5, 0.6], 1.0).unwrap();
        let task = Task::Thresholding { tau: 0.59 };
        let cfg = BaselineConfig::new(0.05);
        let a = batched_tas_run(task, &inst, &cfg, RandomSource::new(2, 2)).unwrap();
        let b = batched_tas_run(task, &inst, &cfg, RandomSource::new(2, 2)).unwrap();
        assert!(a.same_outcome(&b));
    }

    proptest! {
        #[test]
        fn apportion_is_exact(shares in proptest::collection::vec(0.0f64..10.0, 1..12), total in 0u64..100_000) {
            let parts = apportion(&shares, total);
            prop_assert_eq!(parts.iter().sum::<u64>(), total);
            let sum: f64 = shares.iter().sum();
            if sum > 0.0 {
                for (p, s) in parts.iter().zip(&shares) {
                    prop_assert!((*p as f64 - s / sum * total as f64).abs() < 1.0 + 1e-9);
                }
            }
        }

        #[test]
        fn tracking_fills_the_batch(w in proptest::collection::vec(0.01f64..1.0, 2..8), seed_counts in proptest::collection::vec(1u64..500, 8)) {
            let k = w.len();
            let counts = &seed_counts[..k];
            let t: u64 = counts.iter().sum();
            let pulls = tracking_pulls(&w, counts, 2 * t);
            prop_assert_eq!(pulls.iter().sum::<u64>(), t);
        }
    }
}
