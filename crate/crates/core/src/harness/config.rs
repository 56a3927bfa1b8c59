//! Experiment configuration files.
//!
//! Configs are JSON; unknown fields are rejected and every error carries the
//! offending field path and, for syntax errors, the line and column.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{BaselineConfig, PetConfig};
use crate::error::Error;
use crate::instance::{correct_answer, ProblemInstance, Task};
use crate::rng::RandomSource;
use crate::stopping::TbarVariant;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// Dotted path of the offending field, e.g. `algorithms[0].t0`.
    pub field: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.to_string()),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config error")?;
        if let (Some(line), Some(col)) = (self.line, self.column) {
            write!(f, " at line {line}, column {col}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Random instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Arm 0 has mean 1; every other arm has a mean drawn uniformly in `[0.6, 0.9]`.
    Bai10,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_arms: Option<usize>,
}

impl InstanceSpec {
    pub fn fixed(means: Vec<f64>) -> Self {
        Self {
            means: Some(means),
            generator: None,
            num_arms: None,
        }
    }

    pub fn generated(generator: Generator, num_arms: usize) -> Self {
        Self {
            means: None,
            generator: Some(generator),
            num_arms: Some(num_arms),
        }
    }

    pub fn is_generated(&self) -> bool {
        self.generator.is_some()
    }

    /// Means for trial `trial`; generated families draw from the trial's slot-0 stream.
    pub fn means_for_trial(&self, master_seed: u64, trial: u64) -> Vec<f64> {
        match (&self.means, self.generator) {
            (Some(means), _) => means.clone(),
            (None, Some(Generator::Bai10)) => {
                let k = self.num_arms.unwrap_or(10);
                let mut source = RandomSource::for_trial(master_seed, trial, 0);
                let mut means = Vec::with_capacity(k);
                means.push(1.0);
                for _ in 1..k {
                    means.push(source.rng().random_range(0.6..=0.9));
                }
                means
            }
            (None, None) => unreachable!("validated instance spec"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Pet {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default = "default_t0")]
        t0: f64,
        #[serde(default = "default_max_phases")]
        max_phases: u32,
        #[serde(default)]
        tbar_variant: TbarVariant,
    },
    RoundRobin {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default = "default_checkpoint_base")]
        checkpoint_base: u64,
        #[serde(default = "default_max_checkpoints")]
        max_checkpoints: u32,
    },
    BatchedTas {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(default = "default_checkpoint_base")]
        checkpoint_base: u64,
        #[serde(default = "default_max_checkpoints")]
        max_checkpoints: u32,
    },
}

fn default_t0() -> f64 {
    1.0
}

fn default_max_phases() -> u32 {
    PetConfig::DEFAULT_MAX_PHASES
}

fn default_checkpoint_base() -> u64 {
    BaselineConfig::DEFAULT_CHECKPOINT_BASE
}

fn default_max_checkpoints() -> u32 {
    BaselineConfig::DEFAULT_MAX_CHECKPOINTS
}

fn default_sigma2() -> f64 {
    1.0
}

fn default_t_min() -> f64 {
    1.0
}

impl AlgorithmSpec {
    pub fn pet(t0: f64) -> Self {
        Self::Pet {
            label: None,
            t0,
            max_phases: default_max_phases(),
            tbar_variant: TbarVariant::MainText,
        }
    }

    pub fn round_robin() -> Self {
        Self::RoundRobin {
            label: None,
            checkpoint_base: default_checkpoint_base(),
            max_checkpoints: default_max_checkpoints(),
        }
    }

    pub fn batched_tas() -> Self {
        Self::BatchedTas {
            label: None,
            checkpoint_base: default_checkpoint_base(),
            max_checkpoints: default_max_checkpoints(),
        }
    }

    /// Name used in the CSV and summary: the label if set, else the algorithm name.
    pub fn label(&self) -> String {
        let (label, name) = match self {
            Self::Pet { label, .. } => (label, "pet"),
            Self::RoundRobin { label, .. } => (label, "round_robin"),
            Self::BatchedTas { label, .. } => (label, "batched_tas"),
        };
        label.clone().unwrap_or_else(|| name.to_string())
    }

    pub fn pet_config(&self, delta: f64) -> Option<PetConfig> {
        match *self {
            Self::Pet {
                t0,
                max_phases,
                tbar_variant,
                ..
            } => Some(PetConfig {
                t0,
                delta,
                max_phases,
                tbar_variant,
            }),
            _ => None,
        }
    }

    pub fn baseline_config(&self, delta: f64) -> Option<BaselineConfig> {
        match *self {
            Self::RoundRobin {
                checkpoint_base,
                max_checkpoints,
                ..
            }
            | Self::BatchedTas {
                checkpoint_base,
                max_checkpoints,
                ..
            } => Some(BaselineConfig {
                delta,
                checkpoint_base,
                max_checkpoints,
            }),
            Self::Pet { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_summary")]
    pub summary: String,
    #[serde(default = "default_bounds")]
    pub bounds: String,
}

fn default_csv() -> String {
    "runs.csv".into()
}

fn default_summary() -> String {
    "summary.json".into()
}

fn default_bounds() -> String {
    "bounds.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            summary: default_summary(),
            bounds: default_bounds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(with = "task_string")]
    pub task: Task,
    pub instance: InstanceSpec,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    pub delta: f64,
    pub algorithms: Vec<AlgorithmSpec>,
    pub trials: u64,
    pub master_seed: u64,
    /// Smallest complexity of the instance class, used by the batch lower bound.
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default)]
    pub outputs: OutputSpec,
}

mod task_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::instance::Task;

    pub fn serialize<S: Serializer>(task: &Task, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(task)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Task, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            ConfigError {
                field: (path != ".").then_some(path),
                line: Some(inner.line()),
                column: Some(inner.column()),
                message: inner.to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            field: None,
            line: None,
            column: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }

    /// Semantic checks that the JSON schema cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::field("trials", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::field("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(ConfigError::field("sigma2", "must be positive and finite"));
        }
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return Err(ConfigError::field("t_min", "must be positive and finite"));
        }
        let num_arms = match (&self.instance.means, self.instance.generator) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::field("instance", "give either `means` or `generator`, not both"))
            }
            (None, None) => return Err(ConfigError::field("instance", "needs `means` or `generator`")),
            (Some(means), None) => {
                if self.instance.num_arms.is_some_and(|k| k != means.len()) {
                    return Err(ConfigError::field("instance.num_arms", "does not match the number of means"));
                }
                ProblemInstance::new(means.clone(), self.sigma2)
                    .map_err(|e| ConfigError::field("instance.means", e.to_string()))?;
                means.len()
            }
            (None, Some(Generator::Bai10)) => {
                let k = self.instance.num_arms.unwrap_or(10);
                if k < 2 {
                    return Err(ConfigError::field("instance.num_arms", "need at least two arms"));
                }
                k
            }
        };
        self.task
            .validate(num_arms)
            .map_err(|e| ConfigError::field("task", e.to_string()))?;
        if self.algorithms.is_empty() {
            return Err(ConfigError::field("algorithms", "list at least one algorithm"));
        }
        if self.algorithms.len() as u64 >= crate::rng::SLOTS_PER_TRIAL {
            return Err(ConfigError::field("algorithms", "too many algorithms"));
        }
        for (i, spec) in self.algorithms.iter().enumerate() {
            let field = format!("algorithms[{i}]");
            if let Some(pet) = spec.pet_config(self.delta) {
                pet.validate().map_err(|e| ConfigError::field(&field, e.to_string()))?;
            }
            if let Some(base) = spec.baseline_config(self.delta) {
                if base.checkpoint_base < num_arms as u64 {
                    return Err(ConfigError::field(
                        &format!("{field}.checkpoint_base"),
                        format!("must be at least the number of arms ({num_arms})"),
                    ));
                }
                if base.max_checkpoints == 0 {
                    return Err(ConfigError::field(&format!("{field}.max_checkpoints"), "must be positive"));
                }
            }
        }
        let mut labels: Vec<String> = self.algorithms.iter().map(AlgorithmSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::field("algorithms", "labels must be unique; set `label` to tell runs apart"));
        }
        Ok(())
    }

    /// Fixed instances whose correct answer is undefined.
    pub fn check_degenerate(&self) -> Result<(), Error> {
        if let Some(means) = &self.instance.means {
            let inst = ProblemInstance::new(means.clone(), self.sigma2)?;
            correct_answer(self.task, &inst)?;
        }
        Ok(())
    }

    pub fn instance_for_trial(&self, trial: u64) -> Result<ProblemInstance, Error> {
        ProblemInstance::new(self.instance.means_for_trial(self.master_seed, trial), self.sigma2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "task": "topk:1",
        "instance": {"means": [1.0, 0.5]},
        "delta": 0.05,
        "algorithms": [{"name": "pet"}, {"name": "round_robin", "checkpoint_base": 100}],
        "trials": 3,
        "master_seed": 7
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.task, Task::bai());
        assert_eq!(cfg.sigma2, 1.0);
        assert_eq!(cfg.algorithms[0], AlgorithmSpec::pet(1.0));
        assert_eq!(cfg.algorithms[1].baseline_config(0.05).unwrap().checkpoint_base, 100);
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&back).unwrap(), cfg);
    }

    #[test]
    fn unknown_field_is_located() {
        let text = MINIMAL.replace(r#""name": "pet""#, r#""name": "pet", "t_0": 2"#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("algorithms[0]"));
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("t_0"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = ExperimentConfig::from_json(&MINIMAL.replace("\"trials\": 3", "\"trials\": 0")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("trials"));
        let err = ExperimentConfig::from_json(&MINIMAL.replace("topk:1", "topk:2")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("task"));
        let err = ExperimentConfig::from_json(&MINIMAL.replace("\"checkpoint_base\": 100", "\"checkpoint_base\": 1"))
            .unwrap_err();
        assert_eq!(err.field.as_deref(), Some("algorithms[1].checkpoint_base"));
        let err = ExperimentConfig::from_json(&MINIMAL.replace("topk:1", "median")).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("task"));
    }

    #[test]
    fn degenerate_instance_detected() {
        let text = MINIMAL
            .replace("topk:1", "threshold:0.5")
            .replace("[1.0, 0.5]", "[0.6, 0.5]");
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert!(matches!(cfg.check_degenerate(), Err(Error::DegenerateInstance(_))));
    }

    #[test]
    fn generator_draws_per_trial() {
        let spec = InstanceSpec::generated(Generator::Bai10, 10);
        let a = spec.means_for_trial(1, 0);
        let b = spec.means_for_trial(1, 1);
        assert_eq!(a.len(), 10);
        assert_eq!(a[0], 1.0);
        assert!(a[1..].iter().all(|&m| (0.6..=0.9).contains(&m)));
        assert_ne!(a, b);
        assert_eq!(a, spec.means_for_trial(1, 0));
    }
}
