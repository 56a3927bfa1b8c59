//! Phased Explore then Track.
//!
//! Phase `r` targets complexity `T_r = 2^r T0`. It first explores uniformly up
//! to `ceil(2^r l1r)` pulls per arm, then builds the ball of radius `eps_r`
//! around the empirical means. If the worst-case complexity of that ball is at
//! most `T_r`, a second batch tracks the ball's optimal allocation, scaled by
//! `gamma_r`. The GLR stopping rule is checked at the end of every phase.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_inputs, is_correct, pull_batch, AlgorithmKind, RunRecord, RunTrace, MAX_EXACT_COUNT};
use crate::complexity::{ball_complexity, Ball, Complexity};
use crate::error::{Error, Result};
use crate::instance::{empirical_answer, ProblemInstance, SuffStats, Task};
use crate::rng::RandomSource;
use crate::stopping::{gamma_r, stop_check, TbarVariant, ThresholdParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PetConfig {
    /// Starting complexity, in samples.
    pub t0: f64,
    pub delta: f64,
    pub max_phases: u32,
    #[serde(default)]
    pub tbar_variant: TbarVariant,
}

impl PetConfig {
    pub const DEFAULT_MAX_PHASES: u32 = 60;

    pub fn new(t0: f64, delta: f64) -> Result<Self> {
        let cfg = Self {
            t0,
            delta,
            max_phases: Self::DEFAULT_MAX_PHASES,
            tbar_variant: TbarVariant::MainText,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 >= 1.0 && self.t0.is_finite()) {
            return Err(Error::InvalidConfig(format!("T0 must be finite and >= 1, got {}", self.t0)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.max_phases == 0 {
            return Err(Error::InvalidConfig("max_phases must be positive".into()));
        }
        Ok(())
    }
}

/// Deterministic per-phase constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub r: u32,
    pub t_r: f64,
    pub l1r: f64,
    pub eps_r: f64,
    pub p_r: f64,
}

impl PhaseSchedule {
    /// Per-arm pull count reached by the exploration batch, `ceil(2^r l1r)`.
    pub fn explore_target(&self) -> f64 {
        (2f64.powi(self.r as i32) * self.l1r).ceil()
    }
}

pub fn phase_schedule(r: u32, t0: f64, num_arms: usize, sigma2: f64) -> PhaseSchedule {
    let k = num_arms as f64;
    let pow = 2f64.powi(r as i32);
    let t_r = pow * t0;
    let t_next = 2.0 * t_r;
    let l1r = 32.0 * t0 * (2.0 * (2.0 * k).sqrt() * t_r).ln();
    let p_r = t_next.powi(-2);
    // ln(2K / p_r) expanded to avoid overflow of 1 / p_r.
    let log_term = (2.0 * k).ln() + 2.0 * t_next.ln();
    let eps_r = (2.0 * sigma2 / (pow * l1r) * log_term).sqrt();
    PhaseSchedule {
        r,
        t_r,
        l1r,
        eps_r,
        p_r,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    #[serde(flatten)]
    pub schedule: PhaseSchedule,
    pub explore_target: u64,
    pub explore_pulls: Vec<u64>,
    /// Cumulative empirical means after exploration: the ball center.
    pub center: Vec<f64>,
    pub t_bar_estimate: Complexity,
    pub w_bar: Vec<f64>,
    pub entered_second_batch: bool,
    pub gamma_r: Option<f64>,
    pub t_bar_r: Option<u64>,
    pub tracking_pulls: Vec<u64>,
    pub samples_after_phase: u64,
    pub statistic: f64,
    pub threshold: f64,
    pub stopped: bool,
}

fn exact_count(x: f64) -> Option<u64> {
    (x <= MAX_EXACT_COUNT).then_some(x as u64)
}

pub fn pet_run(task: Task, inst: &ProblemInstance, cfg: &PetConfig, mut source: RandomSource) -> Result<RunRecord> {
    let start = Instant::now();
    check_inputs(task, inst, cfg.delta)?;
    cfg.validate()?;
    let k = inst.num_arms();
    let sigma2 = inst.sigma2();
    let params = ThresholdParams::new(cfg.delta, k)?;

    let mut stats = SuffStats::new(k);
    let mut phases = Vec::new();
    let mut batches = 0u64;
    let mut stopped = false;

    'phases: for r in 0..cfg.max_phases {
        let schedule = phase_schedule(r, cfg.t0, k, sigma2);
        let Some(target) = exact_count(schedule.explore_target()) else {
            break;
        };
        let explore_pulls: Vec<u64> = stats.counts().iter().map(|&n| target.saturating_sub(n)).collect();
        if explore_pulls.iter().any(|&p| p > 0) {
            pull_batch(&mut stats, inst, &mut source, &explore_pulls);
            batches += 1;
        }

        let center = stats.means();
        let ball = Ball::new(center.clone(), schedule.eps_r)?;
        let estimate = ball_complexity(task, &ball, sigma2);

        let mut tracking_pulls = vec![0u64; k];
        let mut gamma = None;
        let mut entered = false;
        if let Some(t_bar) = estimate.t_bar.value().filter(|&t| t <= schedule.t_r) {
            entered = true;
            let g = gamma_r(r, cfg.t0, params, schedule.l1r, cfg.tbar_variant)?;
            for (pulls, &w) in tracking_pulls.iter_mut().zip(estimate.w_bar.weights()) {
                match exact_count((g.gamma * w * t_bar).ceil()) {
                    Some(n) => *pulls = n,
                    None => break 'phases,
                }
            }
            gamma = Some(g);
            if tracking_pulls.iter().any(|&p| p > 0) {
                pull_batch(&mut stats, inst, &mut source, &tracking_pulls);
                batches += 1;
            }
        }

        let check = stop_check(task, &stats, sigma2, params)?;
        phases.push(PhaseTrace {
            schedule,
            explore_target: target,
            explore_pulls,
            center,
            t_bar_estimate: estimate.t_bar,
            w_bar: estimate.w_bar.weights().to_vec(),
            entered_second_batch: entered,
            gamma_r: gamma.map(|g| g.gamma),
            t_bar_r: gamma.map(|g| g.t_bar),
            tracking_pulls,
            samples_after_phase: stats.total(),
            statistic: check.statistic,
            threshold: check.threshold,
            stopped: check.stop,
        });
        if check.stop {
            stopped = true;
            break;
        }
    }

    let answer = empirical_answer(task, &stats);
    Ok(RunRecord {
        algorithm: AlgorithmKind::Pet,
        correct: is_correct(task, inst, &answer),
        answer,
        samples: stats.total(),
        batches,
        trace: RunTrace::Phases(phases),
        incomplete: !stopped,
        wall_clock: start.elapsed(),
    })
}
