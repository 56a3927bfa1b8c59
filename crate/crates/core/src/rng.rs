//! Deterministic Gaussian reward streams.
//!
//! Every source is a ChaCha8 generator keyed by a master seed and selected
//! by a 64-bit stream id, so trials can be replayed and run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::instance::ProblemInstance;

/// Number of sub-stream slots reserved per trial.
pub const SLOTS_PER_TRIAL: u64 = 256;

#[derive(Debug, Clone)]
pub struct RandomSource {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    /// Stream for sub-task `slot` of trial `trial`.
    pub fn for_trial(master_seed: u64, trial: u64, slot: u64) -> Self {
        assert!(slot < SLOTS_PER_TRIAL, "slot {slot} out of range");
        Self::new(master_seed, trial * SLOTS_PER_TRIAL + slot)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Sum of `n` independent `Normal(means[arm], sigma2)` rewards.
    ///
    /// The sum of `n` i.i.d. Gaussians is itself Gaussian, so one draw of
    /// `Normal(n mu, n sigma2)` is exact. `n = 0` consumes nothing.
    pub fn draw_rewards(&mut self, inst: &ProblemInstance, arm: usize, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let n = n as f64;
        n * inst.means()[arm] + (n * inst.sigma2()).sqrt() * self.standard_normal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(mu: f64) -> ProblemInstance {
        ProblemInstance::new(vec![mu, 0.0], 1.0).unwrap()
    }

    #[test]
    fn zero_draws_leave_source_untouched() {
        let inst = gaussian(0.3);
        let mut a = RandomSource::new(7, 3);
        let mut b = RandomSource::new(7, 3);
        assert_eq!(a.draw_rewards(&inst, 0, 0), 0.0);
        assert_eq!(a.draw_rewards(&inst, 0, 5), b.draw_rewards(&inst, 0, 5));
    }

    #[test]
    fn same_key_same_sums() {
        let inst = gaussian(0.3);
        let x = RandomSource::new(11, 2).draw_rewards(&inst, 0, 1000);
        let y = RandomSource::new(11, 2).draw_rewards(&inst, 0, 1000);
        assert_eq!(x.to_bits(), y.to_bits());
        let z = RandomSource::new(11, 3).draw_rewards(&inst, 0, 1000);
        assert_ne!(x.to_bits(), z.to_bits());
    }

    #[test]
    fn sample_mean_concentrates() {
        // 4 sigma / sqrt(n) with n = 1000 is about 0.126; the stated bound is 0.1.
        let inst = gaussian(0.0);
        let mut src = RandomSource::new(2024, 0);
        let mean = src.draw_rewards(&inst, 0, 1000) / 1000.0;
        assert!(mean.abs() < 0.1, "sample mean {mean}");
    }

    #[test]
    fn block_sums_match_gaussian_moments() {
        // Sum of n draws: mean n*mu, variance n*sigma2.
        let inst = ProblemInstance::new(vec![0.5, 0.0], 2.0).unwrap();
        let mut src = RandomSource::new(5, 9);
        let reps = 20_000;
        let n = 10u64;
        let sums: Vec<f64> = (0..reps).map(|_| src.draw_rewards(&inst, 0, n)).collect();
        let m = sums.iter().sum::<f64>() / reps as f64;
        let v = sums.iter().map(|s| (s - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((m - 5.0).abs() < 4.0 * (20.0f64 / reps as f64).sqrt());
        assert!((v / 20.0 - 1.0).abs() < 0.05, "variance ratio {}", v / 20.0);
    }
}
