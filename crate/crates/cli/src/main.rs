use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pet_core::complexity::{ball_complexity, char_time_for_means, Ball};
use pet_core::harness::{self, ExperimentConfig, HarnessError};
use pet_core::lowerbound::{batch_lower_bound_terms, LowerBoundInput};
use pet_core::{ProblemInstance, Task};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pet", version, about = "Batched fixed-confidence pure exploration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic time T* and optimal allocation w* of an instance.
    Solve {
        /// `topk:<k>` or `threshold:<tau>`.
        #[arg(long)]
        task: Task,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        means: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
    },
    /// Hardest instance and worst-case complexity of an infinity-norm ball.
    Ball {
        #[arg(long)]
        task: Task,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        center: Vec<f64>,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
    },
    /// Replays one trial of a campaign and prints its run records.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Runs a campaign and writes the CSV rows, JSON summary and bounds report.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Expected batch-complexity lower bound.
    Lowerbound {
        #[arg(long)]
        tstar: f64,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        bigdelta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
    },
}

/// Prints to stdout, ignoring a closed pipe (e.g. output piped into `head`).
fn print_json(value: &serde_json::Value) {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let cfg = ExperimentConfig::load(path)?;
    cfg.check_degenerate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Solve { task, means, sigma2 } => {
            let inst = ProblemInstance::new(means, sigma2)?;
            task.validate(inst.num_arms())?;
            let ct = char_time_for_means(task, inst.means(), sigma2);
            print_json(&json!({ "t_star": ct.t_star, "w_star": ct.w_star }));
        }
        Command::Ball {
            task,
            center,
            radius,
            sigma2,
        } => {
            task.validate(center.len())?;
            let bc = ball_complexity(task, &Ball::new(center, radius)?, sigma2);
            print_json(&json!({ "hardest": bc.hardest, "t_bar": bc.t_bar, "w_bar": bc.w_bar }));
        }
        Command::Run { config, trial } => {
            let cfg = load(&config)?;
            let result = harness::run_trial(&cfg, trial)?;
            print_json(&serde_json::to_value(&result).expect("records serialize"));
            if result.records.iter().any(|r| r.incomplete) {
                return Ok(harness::EXIT_INCOMPLETE);
            }
        }
        Command::Bench { config, out, workers } => {
            let cfg = load(&config)?;
            let campaign = harness::run_campaign(&cfg, workers)?;
            let outputs = harness::write_outputs(&campaign, &out)?;
            for alg in &outputs.summary.algorithms {
                let _ = writeln!(
                    std::io::stdout(),
                    "{}: error rate {:.4}, mean samples {:.1}, mean batches {:.2}, incomplete {}",
                    alg.label, alg.error_rate, alg.samples.mean, alg.batches.mean, alg.incomplete
                );
            }
            if outputs.any_incomplete {
                eprintln!("warning: some runs hit their phase cap; results written to {}", out.display());
                return Ok(harness::EXIT_INCOMPLETE);
            }
        }
        Command::Lowerbound {
            tstar,
            tmin,
            delta,
            gamma,
            bigdelta,
            sigma2,
        } => {
            let terms = batch_lower_bound_terms(&LowerBoundInput {
                t_star: tstar,
                t_min: tmin,
                delta,
                gamma,
                big_delta: bigdelta,
                sigma2,
            })?;
            print_json(&json!({
                "value": terms.value(),
                "floor": terms.value().floor(),
                "terms": terms,
            }));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
