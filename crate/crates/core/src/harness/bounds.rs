//! Measured batch complexities against the theoretical lower and upper bounds.

use serde::{Deserialize, Serialize};

use super::campaign::Campaign;
use crate::complexity::char_time_for_means;
use crate::error::{Error, Result};
use crate::instance::Task;
use crate::lowerbound::{batch_lower_bound, pet_upper_bounds, LowerBoundInput, PetUpperBounds};

/// Largest distance of a mean to the center used by the scaling argument:
/// the midpoint of the means for Top-k, the threshold for thresholding.
pub fn big_delta(task: Task, means: &[f64]) -> f64 {
    match task {
        Task::TopK { .. } => {
            let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = means.iter().copied().fold(f64::INFINITY, f64::min);
            (max - min) / 2.0
        }
        Task::Thresholding { tau } => means.iter().map(|m| (m - tau).abs()).fold(0.0, f64::max),
    }
}

/// Bounds for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceBounds {
    pub t_star: f64,
    pub upper: PetUpperBounds,
    /// `None` when `T* < T_min`.
    pub lower: Option<f64>,
}

pub fn instance_bounds(
    task: Task,
    means: &[f64],
    sigma2: f64,
    t0: f64,
    delta: f64,
    gamma: f64,
    t_min: f64,
) -> Result<InstanceBounds> {
    let t_star = char_time_for_means(task, means, sigma2)
        .t_star
        .value()
        .ok_or_else(|| Error::DegenerateInstance("T* is infinite".into()))?;
    let upper = pet_upper_bounds(t_star, t0, delta, means.len(), sigma2)?;
    let lower = if t_star >= t_min {
        Some(batch_lower_bound(&LowerBoundInput {
            t_star,
            t_min,
            delta,
            gamma,
            big_delta: big_delta(task, means),
            sigma2,
        })?)
    } else {
        None
    };
    Ok(InstanceBounds { t_star, upper, lower })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetBoundsReport {
    pub label: String,
    pub t0: f64,
    pub mean_batches: f64,
    pub mean_samples: f64,
    /// Largest per-instance `mean samples / (ln(1/delta) T*)`.
    pub measured_gamma: f64,
    pub mean_t_star: f64,
    pub mean_t_star_b: f64,
    /// Batch upper bound averaged over the trial instances.
    pub batch_upper: f64,
    pub sample_upper: f64,
    /// Batch lower bound with the measured gamma, averaged over the instances with `T* >= T_min`.
    pub batch_lower: f64,
    pub batch_lower_floor: f64,
    pub instances_below_t_min: usize,
    /// Mean batches at least the lower bound.
    pub consistent: bool,
    pub within_batch_upper: bool,
    pub within_sample_upper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub task: String,
    pub delta: f64,
    pub t_min: f64,
    pub pet: Vec<PetBoundsReport>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Compares every PET entry of the campaign against its bounds.
pub fn evaluate_bounds(campaign: &Campaign) -> Result<BoundsReport> {
    let cfg = &campaign.config;
    let log_inv_delta = (1.0 / cfg.delta).ln();

    // Distinct instances with their trial indices (one group for a fixed instance).
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (i, t) in campaign.trials.iter().enumerate() {
        match groups.iter_mut().find(|(m, _)| *m == t.means) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((t.means.clone(), vec![i])),
        }
    }
    let t_stars: Vec<f64> = groups
        .iter()
        .map(|(means, _)| {
            char_time_for_means(cfg.task, means, cfg.sigma2)
                .t_star
                .value()
                .ok_or_else(|| Error::DegenerateInstance(format!("T* is infinite for means {means:?}")))
        })
        .collect::<Result<_>>()?;

    let mut pet = Vec::new();
    for (j, spec) in cfg.algorithms.iter().enumerate() {
        let Some(pet_cfg) = spec.pet_config(cfg.delta) else {
            continue;
        };
        let samples = |i: usize| campaign.trials[i].records[j].samples as f64;
        let measured_gamma = groups
            .iter()
            .zip(&t_stars)
            .map(|((_, idx), t_star)| mean(idx.iter().map(|&i| samples(i))) / (log_inv_delta * t_star))
            .fold(0.0, f64::max);

        let mut per_trial = Vec::with_capacity(campaign.trials.len());
        for ((means, idx), _) in groups.iter().zip(&t_stars) {
            let b = instance_bounds(cfg.task, means, cfg.sigma2, pet_cfg.t0, cfg.delta, measured_gamma, cfg.t_min)?;
            per_trial.extend(idx.iter().map(|_| b));
        }
        let lowers: Vec<f64> = per_trial.iter().filter_map(|b| b.lower).collect();
        let mean_batches = mean(campaign.records(j).map(|r| r.batches as f64));
        let mean_samples = mean(campaign.records(j).map(|r| r.samples as f64));
        let batch_upper = mean(per_trial.iter().map(|b| b.upper.batches));
        let sample_upper = mean(per_trial.iter().map(|b| b.upper.samples));
        let batch_lower = mean(lowers.iter().copied());
        pet.push(PetBoundsReport {
            label: spec.label(),
            t0: pet_cfg.t0,
            mean_batches,
            mean_samples,
            measured_gamma,
            mean_t_star: mean(per_trial.iter().map(|b| b.t_star)),
            mean_t_star_b: mean(per_trial.iter().map(|b| b.upper.t_star_b)),
            batch_upper,
            sample_upper,
            batch_lower,
            batch_lower_floor: batch_lower.floor(),
            instances_below_t_min: per_trial.len() - lowers.len(),
            consistent: mean_batches >= batch_lower,
            within_batch_upper: mean_batches <= batch_upper,
            within_sample_upper: mean_samples <= sample_upper,
        });
    }
    Ok(BoundsReport {
        task: cfg.task.to_string(),
        delta: cfg.delta,
        t_min: cfg.t_min,
        pet,
    })
}
