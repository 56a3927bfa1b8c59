//! Characteristic times and optimal allocations.
//!
//! For Gaussian arms with common variance `sigma2`, the value of an
//! allocation `w` is the cost of the cheapest alternative instance:
//!
//! - Top-k: `min_{a in top, b not in top} w_a w_b / (w_a + w_b) * (mu_a - mu_b)^2 / (2 sigma2)`
//! - Thresholding: `min_i w_i (mu_i - tau)^2 / (2 sigma2)`
//!
//! `T*` is the inverse of the best value over the simplex and `w*` attains it.

mod ball;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{order_by_mean_desc, ProblemInstance, Task};

pub use ball::{ball_complexity, hardest_instance, Ball, BallComplexity};
pub use solver::{AllocationSolver, MirrorAscentConfig};

/// A complexity measured in samples, or `+inf` for degenerate instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Complexity {
    Finite(f64),
    Infinite,
}

impl Complexity {
    pub fn is_finite(&self) -> bool {
        matches!(self, Complexity::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Complexity::Finite(v) => Some(v),
            Complexity::Infinite => None,
        }
    }

    /// `+inf` maps to `f64::INFINITY`; only for reporting.
    pub fn as_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn at_most(&self, bound: f64) -> bool {
        match *self {
            Complexity::Finite(v) => v <= bound,
            Complexity::Infinite => false,
        }
    }
}

impl Serialize for Complexity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Complexity::Finite(v) => s.serialize_f64(v),
            Complexity::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Complexity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Complexity::Finite(v)),
            Repr::Str(s) if s == "infinite" => Ok(Complexity::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad complexity `{s}`"))),
        }
    }
}

/// Sampling proportions: a point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("empty allocation".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain("allocation weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::Domain(format!("allocation sums to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Normalises nonnegative weights with a positive total.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Domain("cannot normalise weights with zero total".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(num_arms: usize) -> Self {
        Self(vec![1.0 / num_arms as f64; num_arms])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTime {
    pub t_star: Complexity,
    pub w_star: Allocation,
}

/// Whether the correct answer is undefined (tied k-th gap or an arm exactly at `tau`).
pub fn is_degenerate(task: Task, means: &[f64]) -> bool {
    match task {
        Task::TopK { k } => {
            let order = order_by_mean_desc(means);
            means[order[k - 1]] <= means[order[k]]
        }
        Task::Thresholding { tau } => means.contains(&tau),
    }
}

/// One piece of the min defining the alternative cost: a pair `(a, b)` that
/// swaps answer membership, or a single arm crossing the threshold.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece {
    Pair { a: usize, b: usize },
    Single { i: usize },
}

pub(crate) fn pieces(task: Task, means: &[f64]) -> Vec<Piece> {
    match task {
        Task::TopK { k } => {
            let order = order_by_mean_desc(means);
            let (top, rest) = order.split_at(k);
            top.iter()
                .flat_map(|&a| rest.iter().map(move |&b| Piece::Pair { a, b }))
                .collect()
        }
        Task::Thresholding { .. } => (0..means.len()).map(|i| Piece::Single { i }).collect(),
    }
}

/// Cost of one piece under allocation `w`, with the supergradient entries it induces.
pub(crate) fn piece_value(
    piece: Piece,
    task: Task,
    w: &[f64],
    means: &[f64],
    sigma2: f64,
) -> (f64, [(usize, f64); 2]) {
    match piece {
        Piece::Pair { a, b } => {
            let (wa, wb) = (w[a], w[b]);
            if wa + wb <= 0.0 {
                return (0.0, [(a, 0.0), (b, 0.0)]);
            }
            let mid = (wa * means[a] + wb * means[b]) / (wa + wb);
            let ga = (means[a] - mid).powi(2) / (2.0 * sigma2);
            let gb = (means[b] - mid).powi(2) / (2.0 * sigma2);
            (wa * ga + wb * gb, [(a, ga), (b, gb)])
        }
        Piece::Single { i } => {
            let tau = match task {
                Task::Thresholding { tau } => tau,
                Task::TopK { .. } => unreachable!("single-arm pieces only arise for thresholding"),
            };
            let g = (means[i] - tau).powi(2) / (2.0 * sigma2);
            (w[i] * g, [(i, g), (i, 0.0)])
        }
    }
}

/// `inf_{lambda in Alt(mu)} sum_i w_i (mu_i - lambda_i)^2 / (2 sigma2)`.
///
/// The top set is taken from `means` (ties to the lowest index). A pair whose
/// weights are both zero contributes 0.
pub fn alt_inf(task: Task, w: &[f64], means: &[f64], sigma2: f64) -> f64 {
    debug_assert_eq!(w.len(), means.len());
    pieces(task, means)
        .into_iter()
        .map(|p| piece_value(p, task, w, means, sigma2).0)
        .fold(f64::INFINITY, f64::min)
}

/// `T*(mu)` and `w*(mu)` with the default (exact) solver.
pub fn char_time(task: Task, inst: &ProblemInstance) -> CharacteristicTime {
    char_time_for_means(task, inst.means(), inst.sigma2())
}

pub fn char_time_for_means(task: Task, means: &[f64], sigma2: f64) -> CharacteristicTime {
    char_time_with(task, means, sigma2, AllocationSolver::Barrier)
}

pub fn char_time_with(
    task: Task,
    means: &[f64],
    sigma2: f64,
    solver: AllocationSolver,
) -> CharacteristicTime {
    let k = means.len();
    if is_degenerate(task, means) {
        return CharacteristicTime {
            t_star: Complexity::Infinite,
            w_star: Allocation::uniform(k),
        };
    }
    let w = solver.solve(task, means, sigma2);
    let value = alt_inf(task, &w, means, sigma2);
    CharacteristicTime {
        t_star: if value > 0.0 {
            Complexity::Finite(1.0 / value)
        } else {
            Complexity::Infinite
        },
        w_star: Allocation(w),
    }
}

/// Closed-form thresholding solution: `w_i ∝ (mu_i - tau)^-2`, `T* = 2 sigma2 sum_i (mu_i - tau)^-2`.
pub fn thresholding_closed_form(tau: f64, means: &[f64], sigma2: f64) -> CharacteristicTime {
    if means.contains(&tau) {
        return CharacteristicTime {
            t_star: Complexity::Infinite,
            w_star: Allocation::uniform(means.len()),
        };
    }
    let inv: Vec<f64> = means.iter().map(|&m| (m - tau).powi(-2)).collect();
    let total: f64 = inv.iter().sum();
    CharacteristicTime {
        t_star: Complexity::Finite(2.0 * sigma2 * total),
        w_star: Allocation(inv.into_iter().map(|x| x / total).collect()),
    }
}

/// `x mu + (1 - x) y` componentwise.
pub fn scale_instance(means: &[f64], x: f64, y: f64) -> Result<Vec<f64>> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("scale factor must lie in (0, 1], got {x}")));
    }
    Ok(means.iter().map(|&m| x * m + (1.0 - x) * y).collect())
}
