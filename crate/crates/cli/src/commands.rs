use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use inspect_core::analysis::{
    final_policy_table, render_table, sample_complexity, write_curve_csv, write_table_csv, Metric,
    Pooling, RunRecord,
};
use inspect_core::env::{
    evaluate_policy, run_episode, write_eval_csv, write_trace_csv, EpisodeMetrics,
};
use inspect_core::ppo::checkpoint::{load_checkpoint, Checkpoint};
use inspect_core::ppo::config::config_hash;
use inspect_core::ppo::policy::{GreedyPolicy, SampledPolicy};
use inspect_core::ppo::{train, RunConfig};
use inspect_core::seeding::{stream_rng, Stream};
use inspect_core::{InspectionEnv, ObsConfig, Policy, RewardWeightState};
use rayon::prelude::*;

use crate::artifact::{
    load_run, prepare_run_dir, ArtifactWriter, EvalSettings, RunManifest, CHECKPOINTS,
    CODE_VERSION, EVAL, FINAL_CHECKPOINT, RUN_SCHEMA,
};
use crate::spec::ExperimentSpec;

#[derive(Debug)]
pub struct SeedOutcome {
    pub seed: u64,
    pub result: Result<PathBuf>,
}

/// Trains, checkpoints and evaluates one seed into its run directory.
pub fn train_seed(spec: &ExperimentSpec, seed: u64, overwrite: bool) -> Result<PathBuf> {
    let ppo = spec.ppo_config()?;
    let mut run = RunConfig::new(&spec.config, seed, ppo)?;
    run.checkpoint_interval = spec.checkpoint_interval;
    let dir = spec.run_dir(seed);
    prepare_run_dir(&dir, overwrite)?;
    let manifest = RunManifest {
        schema_version: RUN_SCHEMA,
        code_version: CODE_VERSION.to_string(),
        config_name: spec.config.clone(),
        obs_config: run.obs,
        seed,
        config_hash: config_hash(&spec.config, &run.ppo),
        hyperparameters: run.ppo.clone(),
        checkpoint_interval: run.checkpoint_interval,
        eval: EvalSettings {
            episodes: spec.eval_episodes,
            seed,
            policy: "greedy".into(),
            w: RewardWeightState::evaluation().w,
        },
        spec: spec.clone(),
    };
    manifest.write(&dir)?;

    let mut writer = ArtifactWriter {
        dir: &dir,
        manifest: &manifest,
    };
    let outcome = train(&run, &mut writer).with_context(|| format!("training seed {seed}"))?;
    let last = outcome.metrics.last().expect("at least one iteration");
    writer.save(
        &dir.join(CHECKPOINTS).join(FINAL_CHECKPOINT),
        last,
        &outcome.net,
    )?;

    let env = InspectionEnv::new(run.obs);
    let mut policy = GreedyPolicy { net: &outcome.net };
    let eval = evaluate_policy(&env, &mut policy, spec.eval_episodes, seed)?;
    write_eval_csv(&dir.join(EVAL), &eval)?;
    log::info!("seed {seed}: done, {}", summarize_eval(&eval));
    Ok(dir)
}

/// Runs every seed of the spec on at most `jobs` threads.
pub fn cmd_train(spec: &ExperimentSpec, jobs: usize, overwrite: bool) -> Result<Vec<SeedOutcome>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;
    let outcomes = pool.install(|| {
        spec.seeds
            .par_iter()
            .map(|&seed| SeedOutcome {
                seed,
                result: train_seed(spec, seed, overwrite),
            })
            .collect::<Vec<_>>()
    });
    Ok(outcomes)
}

fn summarize_eval(eval: &[EpisodeMetrics]) -> String {
    let n = eval.len().max(1) as f64;
    let inspected = eval.iter().map(|e| e.inspected_points as f64).sum::<f64>() / n;
    let success = eval.iter().filter(|e| e.success).count() as f64 / n;
    let dv = eval.iter().map(|e| e.delta_v).sum::<f64>() / n;
    format!("mean inspected {inspected:.2}, success {success:.2}, delta-v {dv:.2}")
}

/// Loads a checkpoint and resolves the observation config it will run with.
pub fn open_checkpoint(
    path: &Path,
    config: Option<&str>,
) -> Result<(Checkpoint, String, ObsConfig)> {
    let ck = load_checkpoint(path)?;
    let (name, obs) = match config {
        Some(name) => (name.to_string(), ObsConfig::named(name)?),
        None => (ck.manifest.config_name.clone(), ck.manifest.obs_config),
    };
    ck.check_config(&name, &obs)?;
    Ok((ck, name, obs))
}

pub struct EvalArgs<'a> {
    pub checkpoint: &'a Path,
    pub config: Option<&'a str>,
    pub episodes: usize,
    pub seed: Option<u64>,
    pub sample: bool,
    pub out: &'a Path,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<EpisodeMetrics>> {
    if args.episodes == 0 {
        bail!("--episodes must be positive");
    }
    let (ck, _, obs) = open_checkpoint(args.checkpoint, args.config)?;
    let seed = args.seed.unwrap_or(ck.manifest.seed);
    let env = InspectionEnv::new(obs);
    let eval = if args.sample {
        let mut policy = SampledPolicy {
            net: &ck.net,
            rng: stream_rng(seed, Stream::EvalActions, 0),
        };
        evaluate_policy(&env, &mut policy, args.episodes, seed)?
    } else {
        evaluate_policy(
            &env,
            &mut GreedyPolicy { net: &ck.net },
            args.episodes,
            seed,
        )?
    };
    write_eval_csv(args.out, &eval)?;
    log::info!("{}", summarize_eval(&eval));
    Ok(eval)
}

pub fn cmd_trace(
    checkpoint: &Path,
    config: Option<&str>,
    seed: Option<u64>,
    sample: bool,
    out: &Path,
) -> Result<EpisodeMetrics> {
    let (ck, _, obs) = open_checkpoint(checkpoint, config)?;
    let seed = seed.unwrap_or(ck.manifest.seed);
    let env = InspectionEnv::new(obs);
    let mut rng = stream_rng(seed, Stream::Trace, 0);
    let mut rows = Vec::new();
    let weights = RewardWeightState::evaluation();
    let mut greedy = GreedyPolicy { net: &ck.net };
    let mut sampled = SampledPolicy {
        net: &ck.net,
        rng: stream_rng(seed, Stream::EvalActions, 1),
    };
    let policy: &mut dyn Policy = if sample { &mut sampled } else { &mut greedy };
    let metrics = run_episode(&env, policy, &mut rng, &weights, Some(&mut rows))?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    write_trace_csv(out, &rows)?;
    Ok(metrics)
}

pub struct ReportArgs<'a> {
    pub run_dirs: &'a [PathBuf],
    pub out: &'a Path,
    pub pooling: Pooling,
    pub resamples: usize,
    pub seed: u64,
    /// Treat all directories as one curve; mixed configs are an error.
    pub single_curve: bool,
}

pub struct Report {
    pub table: String,
    pub records: Vec<RunRecord>,
}

pub fn cmd_report(args: &ReportArgs) -> Result<Report> {
    if args.run_dirs.is_empty() {
        bail!("no run directories given");
    }
    let records = args
        .run_dirs
        .iter()
        .map(|d| load_run(d))
        .collect::<Result<Vec<_>>>()?;
    let mut groups: BTreeMap<&str, Vec<RunRecord>> = BTreeMap::new();
    for r in &records {
        groups.entry(&r.config_name).or_default().push(r.clone());
    }
    for (name, g) in &groups {
        if g.len() == 1 {
            log::warn!(
                "config `{name}` has a single run; its intervals are degenerate across seeds"
            );
        }
    }
    fs::create_dir_all(args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let curve_groups: Vec<(&str, &[RunRecord])> = if args.single_curve {
        vec![("all", &records[..])]
    } else {
        groups.iter().map(|(k, v)| (*k, &v[..])).collect()
    };
    for (name, group) in curve_groups {
        for metric in Metric::ALL {
            let curve = sample_complexity(group, metric, args.resamples, args.seed)?;
            write_curve_csv(
                &args.out.join(format!("curve_{name}_{}.csv", metric.key())),
                &curve,
            )?;
        }
    }

    let rows = final_policy_table(&records, args.pooling, args.resamples, args.seed)?;
    write_table_csv(&args.out.join("table.csv"), &rows)?;
    let table = render_table(&rows);
    let path = args.out.join("table.txt");
    fs::write(&path, &table).with_context(|| format!("writing {}", path.display()))?;
    Ok(Report { table, records })
}
