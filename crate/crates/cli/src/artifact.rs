//! Per-seed run directories:
//!
//! ```text
//! <output>/<config>/seed_<seed>/
//!     manifest.json
//!     metrics.csv
//!     eval.csv
//!     checkpoints/iter_000010/{manifest.json,params.bin}
//!     checkpoints/final/...
//!     traces/
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use inspect_core::analysis::{append_metrics_row, read_metrics_csv, RunRecord};
use inspect_core::env::read_eval_csv;
use inspect_core::error::IoError;
use inspect_core::ppo::checkpoint::{save_checkpoint, CheckpointMeta};
use inspect_core::ppo::{ActorCritic, IterationMetrics, PPOConfig, TrainCallbacks};
use inspect_core::ObsConfig;
use serde::{Deserialize, Serialize};

use crate::spec::ExperimentSpec;

pub const RUN_SCHEMA: u32 = 1;
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST: &str = "manifest.json";
pub const METRICS: &str = "metrics.csv";
pub const EVAL: &str = "eval.csv";
pub const CHECKPOINTS: &str = "checkpoints";
pub const TRACES: &str = "traces";
pub const FINAL_CHECKPOINT: &str = "final";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub episodes: usize,
    pub seed: u64,
    pub policy: String,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub code_version: String,
    pub config_name: String,
    pub obs_config: ObsConfig,
    pub seed: u64,
    pub config_hash: String,
    pub hyperparameters: PPOConfig,
    pub checkpoint_interval: usize,
    pub eval: EvalSettings,
    pub spec: ExperimentSpec,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let m: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.schema_version != RUN_SCHEMA {
            bail!(
                "{}: unsupported manifest schema {}",
                path.display(),
                m.schema_version
            );
        }
        Ok(m)
    }
}

/// Creates an empty run directory, refusing to reuse one unless `overwrite`.
pub fn prepare_run_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.exists() {
        if !overwrite {
            bail!(
                "{} already exists; pass --overwrite to replace it",
                dir.display()
            );
        }
        fs::remove_dir_all(dir).with_context(|| format!("removing {}", dir.display()))?;
    }
    fs::create_dir_all(dir.join(CHECKPOINTS))
        .with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

pub fn checkpoint_dir(run_dir: &Path, iteration: usize) -> PathBuf {
    run_dir
        .join(CHECKPOINTS)
        .join(format!("iter_{iteration:06}"))
}

/// Streams metric rows and checkpoints into a run directory.
pub struct ArtifactWriter<'a> {
    pub dir: &'a Path,
    pub manifest: &'a RunManifest,
}

impl ArtifactWriter<'_> {
    pub fn save(
        &self,
        dir: &Path,
        metrics: &IterationMetrics,
        net: &ActorCritic,
    ) -> Result<(), IoError> {
        let meta = CheckpointMeta {
            config_name: &self.manifest.config_name,
            obs_config: self.manifest.obs_config,
            iteration: metrics.iteration,
            timesteps: metrics.timesteps,
            seed: self.manifest.seed,
            config_hash: &self.manifest.config_hash,
        };
        save_checkpoint(dir, net, &meta)
    }
}

impl TrainCallbacks for ArtifactWriter<'_> {
    fn on_iteration(
        &mut self,
        metrics: &IterationMetrics,
        _net: &ActorCritic,
    ) -> Result<(), IoError> {
        append_metrics_row(&self.dir.join(METRICS), metrics)
    }

    fn on_checkpoint(
        &mut self,
        metrics: &IterationMetrics,
        net: &ActorCritic,
    ) -> Result<(), IoError> {
        self.save(&checkpoint_dir(self.dir, metrics.iteration), metrics, net)
    }
}

/// Everything `report` needs from one run directory.
pub fn load_run(dir: &Path) -> Result<RunRecord> {
    let manifest = RunManifest::read(dir)?;
    let iterations = read_metrics_csv(&dir.join(METRICS))?;
    let eval_path = dir.join(EVAL);
    let eval = if eval_path.exists() {
        read_eval_csv(&eval_path)?
    } else {
        log::warn!("{} has no {EVAL}", dir.display());
        Vec::new()
    };
    Ok(RunRecord {
        config_name: manifest.config_name,
        seed: manifest.seed,
        iterations,
        eval,
    })
}
