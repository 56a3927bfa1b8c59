//! Instances, tasks, answers and sufficient statistics.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian bandit instance: one mean per arm and a common variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    means: Vec<f64>,
    sigma2: f64,
}

impl ProblemInstance {
    pub fn new(means: Vec<f64>, sigma2: f64) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least two arms, got {}",
                means.len()
            )));
        }
        if let Some(i) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidInstance(format!("mean of arm {i} is not finite")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "sigma2 must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { means, sigma2 })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }
}

/// The pure-exploration query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    /// Identify the `k` arms with the largest means. `k = 1` is best-arm identification.
    TopK { k: usize },
    /// Identify every arm whose mean is strictly above `tau`.
    Thresholding { tau: f64 },
}

impl Task {
    pub fn bai() -> Self {
        Task::TopK { k: 1 }
    }

    /// Checks the task against the number of arms it will be used with.
    pub fn validate(&self, num_arms: usize) -> Result<()> {
        match *self {
            Task::TopK { k } if k == 0 || k >= num_arms => Err(Error::InvalidTask(format!(
                "top-k needs 1 <= k <= K-1, got k={k} with K={num_arms}"
            ))),
            Task::Thresholding { tau } if !tau.is_finite() => {
                Err(Error::InvalidTask("threshold must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::TopK { k } => write!(f, "topk:{k}"),
            Task::Thresholding { tau } => write!(f, "threshold:{tau}"),
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    /// Parses `topk:<k>`, `bai` or `threshold:<tau>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("bai") {
            return Ok(Task::bai());
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidTask(format!("expected topk:<k> or threshold:<tau>, got `{s}`")))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "topk" => value
                .trim()
                .parse::<usize>()
                .map(|k| Task::TopK { k })
                .map_err(|e| Error::InvalidTask(format!("bad k `{value}`: {e}"))),
            "threshold" | "tbp" => value
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidTask(format!("bad tau `{value}`: {e}")))
                .and_then(|tau| {
                    if tau.is_finite() {
                        Ok(Task::Thresholding { tau })
                    } else {
                        Err(Error::InvalidTask("threshold must be finite".into()))
                    }
                }),
            other => Err(Error::InvalidTask(format!("unknown task kind `{other}`"))),
        }
    }
}

/// A set of arm indices, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Answer {
    indices: Vec<usize>,
}

impl Answer {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.indices.binary_search(&arm).is_ok()
    }
}

/// Arm indices ordered by decreasing mean, ties broken by lowest index.
pub(crate) fn order_by_mean_desc(means: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| {
        means[b]
            .partial_cmp(&means[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// The unique correct answer `i*(mu)`.
pub fn correct_answer(task: Task, inst: &ProblemInstance) -> Result<Answer> {
    task.validate(inst.num_arms())?;
    let means = inst.means();
    match task {
        Task::TopK { k } => {
            let order = order_by_mean_desc(means);
            if means[order[k - 1]] <= means[order[k]] {
                return Err(Error::DegenerateInstance(format!(
                    "k-th and (k+1)-th largest means are tied at {}",
                    means[order[k]]
                )));
            }
            Ok(Answer::new(order[..k].to_vec()))
        }
        Task::Thresholding { tau } => {
            if let Some(i) = means.iter().position(|&m| m == tau) {
                return Err(Error::DegenerateInstance(format!(
                    "arm {i} has mean exactly at the threshold {tau}"
                )));
            }
            Ok(thresholded(means, tau))
        }
    }
}

fn thresholded(means: &[f64], tau: f64) -> Answer {
    Answer::new(
        means
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > tau)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Answer computed from a vector of (empirical) means. Total: ties go to the
/// lowest index and a mean equal to `tau` counts as not above it.
pub fn answer_from_means(task: Task, means: &[f64]) -> Answer {
    match task {
        Task::TopK { k } => {
            let order = order_by_mean_desc(means);
            Answer::new(order[..k.min(order.len())].to_vec())
        }
        Task::Thresholding { tau } => thresholded(means, tau),
    }
}

/// `i*(mu_hat)` from sufficient statistics. Requires every count to be positive.
pub fn empirical_answer(task: Task, stats: &SuffStats) -> Answer {
    answer_from_means(task, &stats.means())
}

/// Per-arm pull counts and reward sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuffStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl SuffStats {
    pub fn new(num_arms: usize) -> Self {
        Self {
            counts: vec![0; num_arms],
            sums: vec![0.0; num_arms],
        }
    }

    pub fn from_parts(counts: Vec<u64>, sums: Vec<f64>) -> Result<Self> {
        if counts.len() != sums.len() {
            return Err(Error::InvalidInstance(format!(
                "counts has {} arms but sums has {}",
                counts.len(),
                sums.len()
            )));
        }
        Ok(Self { counts, sums })
    }

    pub fn num_arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Total number of samples `t`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, arm: usize, n: u64, sum: f64) {
        self.counts[arm] += n;
        self.sums[arm] += sum;
    }

    pub fn mean(&self, arm: usize) -> Option<f64> {
        (self.counts[arm] > 0).then(|| self.sums[arm] / self.counts[arm] as f64)
    }

    /// Empirical means; arms never pulled report NaN.
    pub fn means(&self) -> Vec<f64> {
        (0..self.num_arms())
            .map(|i| self.mean(i).unwrap_or(f64::NAN))
            .collect()
    }

    pub fn all_pulled(&self) -> bool {
        self.counts.iter().all(|&n| n > 0)
    }
}
