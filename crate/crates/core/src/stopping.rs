//! GLR stopping rule and its thresholds.
//!
//! The stopping statistic is the cost of the cheapest alternative under the
//! observed counts,
//!
//! ```text
//! Z_t = inf_{lambda in Alt(mu_hat)} sum_i N_i (mu_hat_i - lambda_i)^2 / (2 sigma2)
//! ```
//!
//! and the run stops when `Z_t > beta(t, delta)` with
//!
//! ```text
//! beta(t, delta) = K/2 * Wbar( 2/K ln(1/delta) + 4 ln(ln(e t / K)) + 2 ln(e pi^2 / 6) )
//! ```
//!
//! where `Wbar(x) = -W_{-1}(-e^{-x})` is the solution `w >= 1` of `w - ln w = x`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::complexity::alt_inf;
use crate::error::{Error, Result};
use crate::instance::{SuffStats, Task};

/// `ln(e pi^2 / 6)`.
fn ln_e_pi2_over_6() -> f64 {
    (E * PI * PI / 6.0).ln()
}

/// Excess `d = Wbar(x) - x`, the root of `d = ln(x + d)` with `x + d >= 1`.
///
/// Working with the excess keeps full relative precision on `ln Wbar(x)` for
/// large `x`, where `Wbar(x)` itself cannot resolve an absolute residual of 1e-12.
pub fn lambert_wbar_excess(x: f64) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Wbar needs x >= 1, got {x}")));
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    // Newton on h(d) = d - ln(x + d), convex and increasing on the branch.
    let floor = 1.0 + 1e-15 - x;
    let mut d = x.ln();
    for _ in 0..100 {
        let w = x + d;
        let h = d - w.ln();
        let slope = 1.0 - 1.0 / w;
        if h == 0.0 || slope <= 0.0 {
            break;
        }
        let next = (d - h / slope).max(floor);
        if (next - d).abs() <= 4.0 * f64::EPSILON * d.abs().max(1e-300) {
            d = next;
            break;
        }
        d = next;
    }
    Ok(d)
}

/// `Wbar(x) = -W_{-1}(-e^{-x})`, defined for `x >= 1` (`Wbar(1) = 1`).
pub fn lambert_wbar(x: f64) -> Result<f64> {
    Ok(x + lambert_wbar_excess(x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub delta: f64,
    pub num_arms: usize,
}

impl ThresholdParams {
    pub fn new(delta: f64, num_arms: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        if num_arms == 0 {
            return Err(Error::Domain("need at least one arm".into()));
        }
        Ok(Self { delta, num_arms })
    }
}

/// Time-uniform threshold `beta(t, delta)`, valid for `t >= K`.
pub fn beta_threshold(t: u64, params: ThresholdParams) -> Result<f64> {
    if t < params.num_arms as u64 {
        return Err(Error::Domain(format!(
            "beta(t, delta) needs t >= K = {}, got t = {t}",
            params.num_arms
        )));
    }
    beta_at(t as f64, params)
}

pub(crate) fn beta_at(t: f64, params: ThresholdParams) -> Result<f64> {
    let k = params.num_arms as f64;
    let arg = 2.0 / k * (1.0 / params.delta).ln()
        + 4.0 * (1.0 + (t / k).ln()).ln()
        + 2.0 * ln_e_pi2_over_6();
    Ok(k / 2.0 * lambert_wbar(arg)?)
}

/// Threshold built from the individual pull counts; never looser than
/// [`beta_threshold`] at the same total.
pub fn beta_threshold_per_arm(counts: &[u64], delta: f64) -> Result<f64> {
    let params = ThresholdParams::new(delta, counts.len())?;
    if let Some(i) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Domain(format!("arm {i} has never been pulled")));
    }
    let k = counts.len() as f64;
    let log_prod: f64 = counts
        .iter()
        .map(|&n| 2.0 * (1.0 + (n as f64).ln()).ln())
        .sum();
    let arg = 2.0 * ln_e_pi2_over_6() + 2.0 / k * log_prod + 2.0 / k * (1.0 / params.delta).ln();
    Ok(k / 2.0 * lambert_wbar(arg)?)
}

/// GLR statistic `t * alt_inf(N / t, mu_hat)`. Requires every count to be positive.
pub fn glr_statistic(task: Task, stats: &SuffStats, sigma2: f64) -> f64 {
    debug_assert!(stats.all_pulled());
    let weights: Vec<f64> = stats.counts().iter().map(|&n| n as f64).collect();
    alt_inf(task, &weights, &stats.means(), sigma2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCheck {
    pub statistic: f64,
    pub threshold: f64,
    pub stop: bool,
}

pub fn stop_check(
    task: Task,
    stats: &SuffStats,
    sigma2: f64,
    params: ThresholdParams,
) -> Result<StopCheck> {
    let threshold = beta_threshold(stats.total(), params)?;
    let statistic = glr_statistic(task, stats, sigma2);
    Ok(StopCheck {
        statistic,
        threshold,
        stop: statistic > threshold,
    })
}

/// `glr_statistic > beta(t, delta)`, strictly.
pub fn should_stop(task: Task, stats: &SuffStats, sigma2: f64, params: ThresholdParams) -> bool {
    stop_check(task, stats, sigma2, params)
        .map(|c| c.stop)
        .unwrap_or(false)
}

/// Which bound on the samples used by the end of phase `r` sizes `gamma_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TbarVariant {
    /// `t_bar_r = K 2^r l1r + gamma T_r`.
    #[default]
    MainText,
    /// `t_bar_r = (K l1r / T0 + 2 gamma) T_r`, used by the gamma_r upper bound.
    Appendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaR {
    pub gamma: f64,
    pub t_bar: u64,
}

const GAMMA_MAX_ITERATIONS: usize = 10_000;

/// Fixed point `gamma = beta(ceil(t_bar_r(gamma)), delta)`.
///
/// The map is nondecreasing and piecewise constant in `gamma`, so iteration
/// from below reaches an exact fixed point in finitely many steps.
pub fn gamma_r(r: u32, t0: f64, params: ThresholdParams, l1r: f64, variant: TbarVariant) -> Result<GammaR> {
    if !(t0 >= 1.0) {
        return Err(Error::Domain(format!("T0 must be >= 1, got {t0}")));
    }
    if !(l1r > 0.0) {
        return Err(Error::Domain(format!("l1r must be positive, got {l1r}")));
    }
    let k = params.num_arms as f64;
    let pow = 2f64.powi(r as i32);
    let t_r = pow * t0;
    let base = k * pow * l1r;
    let mult = match variant {
        TbarVariant::MainText => 1.0,
        TbarVariant::Appendix => 2.0,
    };
    let t_bar_of = |g: f64| (base + mult * g * t_r).ceil();

    let mut t_bar = (base + k).ceil();
    let mut gamma = beta_at(t_bar, params)?;
    for _ in 0..GAMMA_MAX_ITERATIONS {
        let next_t = t_bar_of(gamma);
        if next_t == t_bar {
            return Ok(GammaR {
                gamma,
                t_bar: t_bar as u64,
            });
        }
        t_bar = next_t;
        gamma = beta_at(t_bar, params)?;
    }
    Err(Error::NoConvergence {
        what: "gamma_r fixed point",
        iterations: GAMMA_MAX_ITERATIONS,
    })
}
