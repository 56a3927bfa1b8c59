//! Worst-case complexity over infinity-norm balls.
//!
//! When a ball holds a single answer it contains a hardest instance `b`:
//! an allocation that solves `b` solves every other instance of the ball.
//! For Top-k, `b` lowers the top-k means by the radius and raises the
//! others; for thresholding it moves every mean toward `tau`.

use serde::{Deserialize, Serialize};

use super::{char_time_for_means, Allocation, Complexity};
use crate::error::{Error, Result};
use crate::instance::{order_by_mean_desc, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius must be finite and >= 0, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("ball center must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.center.len()
            && point
                .iter()
                .zip(&self.center)
                .all(|(p, c)| (p - c).abs() <= self.radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallComplexity {
    pub t_bar: Complexity,
    pub w_bar: Allocation,
    /// `None` when the ball straddles an answer boundary.
    pub hardest: Option<Vec<f64>>,
}

/// The hardest instance of the ball, or `None` if the ball contains more than one answer.
pub fn hardest_instance(task: Task, ball: &Ball) -> Option<Vec<f64>> {
    let (mu, eps) = (&ball.center, ball.radius);
    match task {
        Task::TopK { k } => {
            let order = order_by_mean_desc(mu);
            if mu[order[k - 1]] - mu[order[k]] <= 2.0 * eps {
                return None;
            }
            let mut b = mu.clone();
            for (rank, &i) in order.iter().enumerate() {
                b[i] = if rank < k { mu[i] - eps } else { mu[i] + eps };
            }
            Some(b)
        }
        Task::Thresholding { tau } => {
            if mu.iter().any(|&m| (m - tau).abs() <= eps) {
                return None;
            }
            Some(
                mu.iter()
                    .map(|&m| if m > tau { m - eps } else { m + eps })
                    .collect(),
            )
        }
    }
}

/// `T̄*(ball)` and `w̄*(ball)`: the characteristic time and allocation of the hardest instance.
pub fn ball_complexity(task: Task, ball: &Ball, sigma2: f64) -> BallComplexity {
    match hardest_instance(task, ball) {
        Some(b) => {
            let ct = char_time_for_means(task, &b, sigma2);
            BallComplexity {
                t_bar: ct.t_star,
                w_bar: ct.w_star,
                hardest: Some(b),
            }
        }
        None => BallComplexity {
            t_bar: Complexity::Infinite,
            w_bar: Allocation::uniform(ball.center.len()),
            hardest: None,
        },
    }
}
