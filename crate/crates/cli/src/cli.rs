use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use inspect_core::analysis::{Pooling, DEFAULT_RESAMPLES};
use inspect_core::ObsConfig;
use serde_json::Map;

use crate::commands::{cmd_eval, cmd_report, cmd_trace, cmd_train, EvalArgs, ReportArgs};
use crate::spec::{parse_override, ExperimentSpec, DEFAULT_EVAL_EPISODES};

#[derive(Debug, Parser)]
#[command(
    name = "inspect",
    version,
    about = "Train and evaluate spacecraft inspection policies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one run per seed and evaluate each final policy.
    Train(TrainArgs),
    /// Evaluate a checkpoint with the fuel weight fixed at its evaluation value.
    Eval(EvalCmd),
    /// Aggregate run directories into tables and learning curves.
    Report(ReportCmd),
    /// Record a per-step trace of one episode.
    Trace(TraceCmd),
}

fn config_name(s: &str) -> Result<String, String> {
    ObsConfig::named(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSON experiment spec; flags override its fields.
    #[arg(long, env = "INSPECT_SPEC")]
    pub spec: Option<PathBuf>,
    #[arg(long, env = "INSPECT_CONFIG", value_parser = config_name)]
    pub config: Option<String>,
    #[arg(long, env = "INSPECT_SEEDS", value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, env = "INSPECT_TIMESTEPS")]
    pub timesteps: Option<u64>,
    #[arg(long, env = "INSPECT_EVAL_EPISODES")]
    pub eval_episodes: Option<usize>,
    #[arg(long, env = "INSPECT_OUT")]
    pub out: Option<PathBuf>,
    /// Hyperparameter override, e.g. `--set lr=1e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, env = "INSPECT_CHECKPOINT_INTERVAL")]
    pub checkpoint_interval: Option<usize>,
    /// Seeds trained concurrently.
    #[arg(long, env = "INSPECT_JOBS", default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub overwrite: bool,
}

impl TrainArgs {
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.spec {
            Some(path) => ExperimentSpec::load(path)?,
            None => {
                let Some(config) = self.config.clone() else {
                    bail!("--config is required without --spec")
                };
                let Some(seeds) = self.seeds.clone() else {
                    bail!("--seeds is required without --spec")
                };
                let Some(total_timesteps) = self.timesteps else {
                    bail!("--timesteps is required without --spec")
                };
                ExperimentSpec {
                    config,
                    seeds,
                    total_timesteps,
                    eval_episodes: DEFAULT_EVAL_EPISODES,
                    output_dir: "runs".into(),
                    overrides: Map::new(),
                    checkpoint_interval: 0,
                }
            }
        };
        if let Some(c) = &self.config {
            spec.config = c.clone();
        }
        if let Some(s) = &self.seeds {
            spec.seeds = s.clone();
        }
        if let Some(t) = self.timesteps {
            spec.total_timesteps = t;
        }
        if let Some(e) = self.eval_episodes {
            spec.eval_episodes = e;
        }
        if let Some(o) = &self.out {
            spec.output_dir = o.clone();
        }
        if let Some(c) = self.checkpoint_interval {
            spec.checkpoint_interval = c;
        }
        for o in &self.overrides {
            let (k, v) = parse_override(o)?;
            spec.overrides.insert(k, v);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    /// Checkpoint directory.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Observation config; defaults to the one recorded in the checkpoint.
    #[arg(long, value_parser = config_name)]
    pub config: Option<String>,
    #[arg(long, env = "INSPECT_EVAL_EPISODES", default_value_t = DEFAULT_EVAL_EPISODES)]
    pub episodes: usize,
    /// Defaults to the training seed recorded in the checkpoint.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample actions instead of taking the most likely one.
    #[arg(long)]
    pub sample: bool,
    #[arg(long, default_value = "eval.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    #[arg(required = true)]
    pub run_dirs: Vec<PathBuf>,
    #[arg(long, env = "INSPECT_REPORT_OUT", default_value = "report")]
    pub out: PathBuf,
    /// Aggregate per-seed means instead of pooled episodes.
    #[arg(long)]
    pub per_seed: bool,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    pub resamples: usize,
    /// Bootstrap seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Build one curve over all directories (they must share a config).
    #[arg(long)]
    pub single_curve: bool,
}

#[derive(Debug, Args)]
pub struct TraceCmd {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_parser = config_name)]
    pub config: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sample: bool,
    #[arg(long, default_value = "trace.csv")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train(args) => {
            let spec = args.to_spec()?;
            let outcomes = cmd_train(&spec, args.jobs, args.overwrite)?;
            let mut failed = 0;
            for o in &outcomes {
                match &o.result {
                    Ok(dir) => println!("seed {}: ok {}", o.seed, dir.display()),
                    Err(e) => {
                        failed += 1;
                        println!("seed {}: FAILED {e:#}", o.seed);
                    }
                }
            }
            if failed > 0 {
                eprintln!("{failed} of {} seeds failed", outcomes.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Eval(args) => {
            cmd_eval(&EvalArgs {
                checkpoint: &args.checkpoint,
                config: args.config.as_deref(),
                episodes: args.episodes,
                seed: args.seed,
                sample: args.sample,
                out: &args.out,
            })?;
            println!("wrote {}", args.out.display());
        }
        Command::Report(args) => {
            let report = cmd_report(&ReportArgs {
                run_dirs: &args.run_dirs,
                out: &args.out,
                pooling: if args.per_seed {
                    Pooling::SeedMeans
                } else {
                    Pooling::Episodes
                },
                resamples: args.resamples,
                seed: args.seed,
                single_curve: args.single_curve,
            })?;
            print!("{}", report.table);
        }
        Command::Trace(args) => {
            let m = cmd_trace(
                &args.checkpoint,
                args.config.as_deref(),
                args.seed,
                args.sample,
                &args.out,
            )?;
            println!(
                "wrote {}: {} steps, {} inspected, {}",
                args.out.display(),
                m.episode_length,
                m.inspected_points,
                m.done_reason.as_str()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
