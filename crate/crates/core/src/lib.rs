//! Batched fixed-confidence pure exploration in sub-Gaussian multi-armed bandits.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`] and [`rng`]: problem instances, tasks (Top-k / thresholding),
//!   sufficient statistics and deterministic Gaussian reward streams.
//! - [`complexity`]: characteristic times `T*`, optimal allocations `w*`, and
//!   worst-case complexities over infinity-norm balls.
//! - [`stopping`]: the GLR statistic, the Lambert-W thresholds and the
//!   tracking-batch multiplier `gamma_r`.
//! - [`algorithms`]: Phased Explore then Track (PET) and two batched baselines.
//! - [`lowerbound`]: instance-dependent batch-complexity lower bounds.
//! - [`harness`]: seeded Monte Carlo campaigns, CSV/JSON output, bound reports.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod complexity;
pub mod error;
pub mod harness;
pub mod instance;
pub mod lowerbound;
pub mod rng;
pub mod stopping;

pub use error::{Error, Result};
pub use instance::{correct_answer, empirical_answer, Answer, ProblemInstance, SuffStats, Task};
pub use rng::RandomSource;
