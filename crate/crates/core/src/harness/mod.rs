//! Experiment campaigns: configuration, parallel execution, CSV/JSON output
//! and comparison against the batch-complexity bounds.

mod bounds;
mod campaign;
mod config;

use std::path::Path;

pub use bounds::{big_delta, evaluate_bounds, instance_bounds, BoundsReport, InstanceBounds, PetBoundsReport};
pub use campaign::{
    algorithm_stream, run_algorithm, run_campaign, run_trial, AlgorithmSummary, BenchSummary, Campaign,
    Distribution, TrialInstance, TrialResult,
};
pub use config::{AlgorithmSpec, ConfigError, ExperimentConfig, Generator, InstanceSpec, OutputSpec};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] crate::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for invalid input, 3 for degenerate instances, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use crate::Error;
        match self {
            Self::Config(_) => 2,
            Self::Run(Error::DegenerateInstance(_)) => 3,
            Self::Run(
                Error::InvalidConfig(_) | Error::InvalidTask(_) | Error::InvalidInstance(_) | Error::Domain(_),
            ) => 2,
            _ => 1,
        }
    }
}

/// Exit code when some run hit its phase or checkpoint cap.
pub const EXIT_INCOMPLETE: i32 = 4;

/// Files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct BenchOutputs {
    pub summary: BenchSummary,
    pub bounds: Option<BoundsReport>,
    pub any_incomplete: bool,
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the CSV rows, the JSON summary and, when the campaign has a PET
/// entry, the bounds report into `dir`.
pub fn write_outputs(campaign: &Campaign, dir: &Path) -> Result<BenchOutputs, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let names = &campaign.config.outputs;
    write_file(&dir.join(&names.csv), &campaign.to_csv())?;
    let summary = campaign.summary();
    write_file(&dir.join(&names.summary), &to_json(&summary))?;
    let has_pet = campaign
        .config
        .algorithms
        .iter()
        .any(|a| matches!(a, AlgorithmSpec::Pet { .. }));
    let bounds = if has_pet {
        let report = evaluate_bounds(campaign)?;
        write_file(&dir.join(&names.bounds), &to_json(&report))?;
        Some(report)
    } else {
        None
    };
    Ok(BenchOutputs {
        summary,
        bounds,
        any_incomplete: campaign.any_incomplete(),
    })
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
