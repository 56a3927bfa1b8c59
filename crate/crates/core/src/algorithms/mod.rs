//! Batched pure-exploration algorithms.
//!
//! [`pet_run`] is Phased Explore then Track. [`round_robin_run`] and
//! [`batched_tas_run`] are baselines that observe rewards only at the
//! checkpoints `base * 2^r`.

mod baselines;
mod pet;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use baselines::{batched_tas_run, round_robin_run, BaselineConfig, CheckpointTrace};
pub use pet::{pet_run, phase_schedule, PetConfig, PhaseSchedule, PhaseTrace};

use crate::error::{Error, Result};
use crate::instance::{correct_answer, Answer, ProblemInstance, SuffStats, Task};
use crate::rng::RandomSource;

/// Largest pull target handled exactly; beyond it counts lose integer precision in `f64`.
pub(crate) const MAX_EXACT_COUNT: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Pet,
    RoundRobin,
    BatchedTas,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pet => "pet",
            Self::RoundRobin => "round_robin",
            Self::BatchedTas => "batched_tas",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pet" => Ok(Self::Pet),
            "round_robin" | "rr" => Ok(Self::RoundRobin),
            "batched_tas" | "tas" => Ok(Self::BatchedTas),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Per-batch history of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "steps", rename_all = "snake_case")]
pub enum RunTrace {
    Phases(Vec<PhaseTrace>),
    Checkpoints(Vec<CheckpointTrace>),
}

impl RunTrace {
    pub fn len(&self) -> usize {
        match self {
            Self::Phases(p) => p.len(),
            Self::Checkpoints(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: AlgorithmKind,
    pub answer: Answer,
    pub correct: bool,
    /// Total number of samples at the stop.
    pub samples: u64,
    /// Number of observation points (non-empty batches).
    pub batches: u64,
    pub trace: RunTrace,
    /// Set when the run hit its phase or checkpoint cap without stopping.
    pub incomplete: bool,
    #[serde(with = "seconds")]
    pub wall_clock: Duration,
}

impl RunRecord {
    /// Equality ignoring the wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self {
            wall_clock: Duration::ZERO,
            ..self.clone()
        } == Self {
            wall_clock: Duration::ZERO,
            ..other.clone()
        }
    }
}

mod seconds {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// Validates the inputs shared by every algorithm.
pub(crate) fn check_inputs(task: Task, inst: &ProblemInstance, delta: f64) -> Result<()> {
    task.validate(inst.num_arms())?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Draws `pulls[i]` rewards from each arm in index order.
pub(crate) fn pull_batch(
    stats: &mut SuffStats,
    inst: &ProblemInstance,
    source: &mut RandomSource,
    pulls: &[u64],
) {
    for (arm, &n) in pulls.iter().enumerate() {
        if n > 0 {
            let sum = source.draw_rewards(inst, arm, n);
            stats.record(arm, n, sum);
        }
    }
}

pub(crate) fn is_correct(task: Task, inst: &ProblemInstance, answer: &Answer) -> bool {
    correct_answer(task, inst).is_ok_and(|a| &a == answer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for kind in [AlgorithmKind::Pet, AlgorithmKind::RoundRobin, AlgorithmKind::BatchedTas] {
            assert_eq!(kind.name().parse::<AlgorithmKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("opt_bbai".parse::<AlgorithmKind>().is_err());
    }
}
