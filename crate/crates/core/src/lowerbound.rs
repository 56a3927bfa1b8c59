//! Instance-dependent bounds on the batch complexity.
//!
//! The lower bounds hold for any δ-correct algorithm whose expected sample
//! complexity is at most `gamma * ln(1/delta) * T*` on instances of
//! complexity in `(T_min, T_max)`. The upper bounds are PET's guarantees in
//! terms of `T*_b = max(sigma2 / b^2, 2e T*)`. All logarithms are natural.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundInput {
    pub t_star: f64,
    pub t_min: f64,
    pub delta: f64,
    /// Sample-complexity ratio `E[tau] / (ln(1/delta) T*)`.
    pub gamma: f64,
    /// Largest distance of a mean to the scaling center: half the spread of
    /// the means for Top-k, `max |mu_i - tau|` for thresholding.
    pub big_delta: f64,
    pub sigma2: f64,
}

impl LowerBoundInput {
    fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.t_min) || !positive(self.t_star) {
            return Err(Error::Domain("T* and T_min must be positive and finite".into()));
        }
        if self.t_star < self.t_min {
            return Err(Error::Domain(format!(
                "T* = {} is below T_min = {}",
                self.t_star, self.t_min
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !positive(self.gamma) || !positive(self.sigma2) {
            return Err(Error::Domain("gamma and sigma2 must be positive".into()));
        }
        if !(self.big_delta >= 0.0 && self.big_delta.is_finite()) {
            return Err(Error::Domain("big_delta must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// `ln(T* / T_min)`.
    pub fn log_ratio(&self) -> f64 {
        (self.t_star / self.t_min).ln()
    }
}

/// `L / (scale * ln(L^2 max(e, c)))`, or 0 when the logarithm is not positive.
fn log_ratio_term(l: f64, c: f64, scale: f64) -> f64 {
    let denom = (l * l * c.max(E)).ln();
    if denom > 0.0 {
        l / (scale * denom)
    } else {
        0.0
    }
}

/// The three terms of the expected batch-complexity lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundTerms {
    pub log_term: f64,
    pub ratio_term: f64,
    pub delta_term: f64,
}

impl LowerBoundTerms {
    pub fn value(&self) -> f64 {
        self.log_term.min(self.ratio_term).min(self.delta_term)
    }
}

pub fn batch_lower_bound_terms(input: &LowerBoundInput) -> Result<LowerBoundTerms> {
    input.validate()?;
    let l = input.log_ratio();
    let root = 1.0 + (input.t_star * input.big_delta.powi(2) / input.sigma2).sqrt();
    let c_delta = 1.0 + 4.0 * input.gamma * (1.0 / input.delta).ln() * l * root * root;
    Ok(LowerBoundTerms {
        log_term: log_ratio_term(l, c_delta, 2.0),
        ratio_term: l / 6.0,
        delta_term: 1.0 / (6.0 * input.delta),
    })
}

/// Lower bound on `E[R_delta]`:
/// `min{ L / (2 ln(L^2 max(e, C))), L / 6, 1 / (6 delta) }` with `L = ln(T*/T_min)`
/// and `C = 1 + 4 gamma ln(1/delta) L (1 + sqrt(T* Delta^2 / sigma2))^2`.
///
/// Returns 0 when `T* = T_min`; a nonpositive logarithm in the first term also gives 0.
pub fn batch_lower_bound(input: &LowerBoundInput) -> Result<f64> {
    Ok(batch_lower_bound_terms(input)?.value())
}

/// Largest `N` with `(k + N^2 (a + b ln N))^N <= rho`, in the closed form
/// `floor(ln rho / ln((ln rho)^2 (A + b ln ln rho)))`, `A = max(e, k + a)`.
pub fn suff_n(rho: f64, a: f64, b: f64, k: f64) -> Result<u64> {
    if !(rho >= E) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be finite and >= e, got {rho}")));
    }
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::Domain("a and b must be nonnegative".into()));
    }
    let big_a = E.max(k + a);
    let lr = rho.ln();
    let n = lr / (lr * lr * (big_a + b * lr.ln())).ln();
    Ok(n.floor() as u64)
}

/// Real-valued `N` such that `P(R_delta >= N) >= 1/2` for algorithms with
/// `P(tau > gamma ln(1/delta) T*) <= c`:
/// `min{ L / ln(L^2 max(e, C)), 1 / (2 delta + c) }`,
/// `C = 1 + 4 gamma ln(1/delta) (1 + sqrt(T* Delta^2 / (2 sigma2)))^2`.
pub fn lemma_bar_value(input: &LowerBoundInput, high_prob_c: f64) -> Result<f64> {
    input.validate()?;
    if !(high_prob_c > 0.0 && high_prob_c < 1.0) {
        return Err(Error::Domain(format!("c must lie in (0, 1), got {high_prob_c}")));
    }
    let l = input.log_ratio();
    let root = 1.0 + (input.t_star * input.big_delta.powi(2) / (2.0 * input.sigma2)).sqrt();
    let c = 1.0 + 4.0 * input.gamma * (1.0 / input.delta).ln() * root * root;
    Ok(log_ratio_term(l, c, 1.0).min(1.0 / (2.0 * input.delta + high_prob_c)))
}

/// [`lemma_bar_value`] rounded down.
pub fn lemma_bar_n(input: &LowerBoundInput, high_prob_c: f64) -> Result<u64> {
    Ok(lemma_bar_value(input, high_prob_c)?.floor() as u64)
}

/// PET's guaranteed expected batch and sample complexities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PetUpperBounds {
    /// `T*_b = max(sigma2 / b^2, 2e T*)` with `b = sqrt(sigma2 / (8 T*))`, i.e. `8 T*`.
    pub t_star_b: f64,
    pub batches: f64,
    pub samples: f64,
}

pub fn pet_upper_bounds(t_star: f64, t0: f64, delta: f64, num_arms: usize, sigma2: f64) -> Result<PetUpperBounds> {
    if !(t_star > 0.0 && t_star.is_finite()) {
        return Err(Error::Domain(format!("T* must be positive and finite, got {t_star}")));
    }
    if !(t0 >= 1.0) || !(delta > 0.0 && delta < 1.0) || !(sigma2 > 0.0) {
        return Err(Error::Domain("need T0 >= 1, delta in (0, 1) and sigma2 > 0".into()));
    }
    let b = (sigma2 / (8.0 * t_star)).sqrt();
    let t_b = (sigma2 / (b * b)).max(2.0 * E * t_star);
    let k = num_arms as f64;
    let batches = (t_b / t0).log2() + (t_b / t_star).log2() + 2.0;
    let samples = 4.0 * (1.0 / delta).ln() * (t_b + 1.0 / t0)
        + 20.0 * k * (k.ln() + 4.0) * (t_b + 1.0 / t0)
        + 48.0 * k * (t_b * t_b.ln() + (4.0 * t0).ln() / t0);
    Ok(PetUpperBounds {
        t_star_b: t_b,
        batches,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(t_star: f64, t_min: f64, delta: f64, gamma: f64, big_delta: f64) -> LowerBoundInput {
        LowerBoundInput {
            t_star,
            t_min,
            delta,
            gamma,
            big_delta,
            sigma2: 1.0,
        }
    }

    #[test]
    fn known_complexity_gives_zero() {
        assert_eq!(batch_lower_bound(&input(50.0, 50.0, 0.05, 2.0, 0.5)).unwrap(), 0.0);
        assert!(batch_lower_bound(&input(10.0, 50.0, 0.05, 2.0, 0.5)).is_err());
    }

    #[test]
    fn spot_value_matches_independent_arithmetic() {
        let inp = input(1e4, 1.0, 0.01, 10.0, 0.5);
        let terms = batch_lower_bound_terms(&inp).unwrap();
        // Each term rebuilt from its pieces: L = ln 1e4, sqrt(1e4 * 0.25) = 50.
        let l = 4.0 * 10f64.ln();
        let c = 1.0 + 40.0 * 100f64.ln() * l * 51.0 * 51.0;
        let first = l / (2.0 * (2.0 * l.ln() + c.ln()));
        assert!((terms.log_term - first).abs() <= 1e-12 * first);
        assert!((terms.ratio_term - l / 6.0).abs() <= 1e-12);
        assert!((terms.delta_term - 100.0 / 6.0).abs() <= 1e-12);
        assert_eq!(batch_lower_bound(&inp).unwrap(), first);
    }

    #[test]
    fn large_delta_term_binds() {
        let inp = input(1e12, 1.0, 0.9, 1.0, 0.0);
        let terms = batch_lower_bound_terms(&inp).unwrap();
        assert_eq!(terms.value(), terms.delta_term);
    }

    #[test]
    fn suff_n_examples() {
        // ln 500 ~ 6.215, so floor(10 / ln 500) = 1.
        assert_eq!(suff_n(10f64.exp(), 4.0, 0.0, 1.0).unwrap(), 1);
        // rho = e with A > e gives N = 0 and the inequality reads 1 <= e.
        assert_eq!(suff_n(E, 4.0, 0.0, 1.0).unwrap(), 0);
        // With A = e the formula gives N = 1, and (k + a)^1 <= e still holds.
        assert_eq!(suff_n(E, 0.0, 0.0, 1.0).unwrap(), 1);
        assert!(suff_n(2.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn lemma_bar_small_cases() {
        let inp = input(E * 3.0, 3.0, 0.2, 1.0, 0.1);
        assert!(lemma_bar_n(&inp, 0.05).unwrap() <= 1);
        let inp = input(1e30, 1.0, 0.24, 0.01, 0.0);
        assert_eq!(lemma_bar_n(&inp, 0.26).unwrap(), 1);
        assert!(lemma_bar_value(&inp, 0.0).is_err());
        assert!(lemma_bar_value(&inp, 1.0).is_err());
    }

    #[test]
    fn upper_bounds_two_arm_example() {
        let ub = pet_upper_bounds(8.0, 1.0, 0.05, 2, 1.0).unwrap();
        assert!((ub.t_star_b - 64.0).abs() < 1e-9);
        assert!((ub.batches - 11.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn suff_n_satisfies_inequality(log_rho in 1.0f64..200.0, a in 0.0f64..50.0, b in 0.0f64..10.0, k in 0.0f64..10.0) {
            let n = suff_n(log_rho.exp(), a, b, k).unwrap();
            if n > 0 {
                let nf = n as f64;
                let lhs = nf * (k + nf * nf * (a + b * nf.ln())).ln();
                prop_assert!(lhs <= log_rho * (1.0 + 1e-12));
            }
        }

        #[test]
        fn lower_bound_below_half_lemma_bar(log_ratio in 1.0f64..60.0, delta in 1e-6f64..0.5, gamma in 0.5f64..50.0, big_delta in 0.0f64..3.0) {
            let inp = LowerBoundInput {
                t_star: log_ratio.exp(),
                t_min: 1.0,
                delta,
                gamma,
                big_delta,
                sigma2: 1.0,
            };
            let c = delta.max(1.0 / log_ratio);
            prop_assume!(c < 1.0);
            let scaled = LowerBoundInput { gamma: gamma / c, ..inp };
            let bar = lemma_bar_value(&scaled, c).unwrap();
            let lb = batch_lower_bound(&inp).unwrap();
            prop_assert!(lb >= 0.0);
            prop_assert!(lb <= bar / 2.0 * (1.0 + 1e-12), "lb {} bar {}", lb, bar);
        }

        #[test]
        fn log_term_grows_with_ratio(log_ratio in 3.0f64..100.0, step in 0.0f64..10.0) {
            let at = |l: f64| batch_lower_bound_terms(&input(l.exp(), 1.0, 1e-9, 1.0, 0.0)).unwrap();
            let (lo, hi) = (at(log_ratio), at(log_ratio + step));
            prop_assert!(lo.ratio_term <= hi.ratio_term);
            if lo.value() == lo.log_term && hi.value() == hi.log_term {
                prop_assert!(lo.log_term <= hi.log_term * (1.0 + 1e-12));
            }
        }
    }
}
