//! Multi-seed aggregation: interquartile means, percentile-bootstrap
//! intervals, learning curves and final-policy tables.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::EpisodeMetrics;
use crate::error::{IoError, StatsError};
use crate::ppo::trainer::{IterationMetrics, METRICS_HEADER};
use crate::seeding::{stream_rng, Stream};
use crate::sensors::display_label;

pub const DEFAULT_RESAMPLES: usize = 2000;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Mean of the middle half of the probability mass. Each sorted value owns
/// an interval of width 1/n; its weight is the overlap with [0.25, 0.75].
pub fn iqm(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooFewValues { needed: 1, got: 0 });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(iqm_sorted(&sorted))
}

fn iqm_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if sorted[0] == sorted[n - 1] {
        return sorted[0];
    }
    // Work in units of 1/(4n): value i spans [4i, 4i+4], the window is [n, 3n].
    let (lo, hi) = (n, 3 * n);
    let mut total = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        let start = (4 * i).max(lo);
        let end = (4 * i + 4).min(hi);
        if end > start {
            total += v * (end - start) as f64;
        }
    }
    total / (2 * n) as f64
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateStat {
    pub iqm: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

impl AggregateStat {
    pub fn degenerate(value: f64, n: usize) -> Self {
        Self {
            iqm: value,
            ci_low: value,
            ci_high: value,
            n,
        }
    }

    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    /// `x [lo, hi]` with every number rounded to two decimals and trailing
    /// zeros dropped, e.g. `8.0 [7.93, 8.07]`.
    pub fn table_cell(&self) -> String {
        format!(
            "{} [{}, {}]",
            round2(self.iqm),
            round2(self.ci_low),
            round2(self.ci_high)
        )
    }
}

/// Two-decimal rendering that keeps at least one fractional digit.
pub fn round2(x: f64) -> String {
    let mut s = format!("{x:.2}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    s
}

/// Percentile bootstrap interval around the IQM. The bounds are clamped so
/// that they always bracket the point estimate.
pub fn bootstrap_ci(
    values: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<AggregateStat, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::TooFewValues { needed: 2, got: n });
    }
    let point = iqm(values)?;
    let mut rng = stream_rng(seed, Stream::Bootstrap, 0);
    let mut stats = Vec::with_capacity(resamples);
    let mut sample = vec![0.0; n];
    for _ in 0..resamples.max(1) {
        for s in sample.iter_mut() {
            *s = values[rng.gen_range(0..n)];
        }
        sample.sort_by(f64::total_cmp);
        stats.push(iqm_sorted(&sample));
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let lo = percentile_sorted(&stats, tail);
    let hi = percentile_sorted(&stats, 1.0 - tail);
    Ok(AggregateStat {
        iqm: point,
        ci_low: lo.min(point),
        ci_high: hi.max(point),
        n,
    })
}

/// IQM with a bootstrap interval, or a zero-width interval for one value.
pub fn aggregate(values: &[f64], resamples: usize, seed: u64) -> Result<AggregateStat, StatsError> {
    match values.len() {
        0 => Err(StatsError::TooFewValues { needed: 1, got: 0 }),
        1 => Ok(AggregateStat::degenerate(values[0], 1)),
        _ => bootstrap_ci(values, resamples, DEFAULT_LEVEL, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    TotalReward,
    InspectedPoints,
    EpisodeLength,
    SuccessRate,
    DeltaV,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::TotalReward,
        Metric::InspectedPoints,
        Metric::EpisodeLength,
        Metric::SuccessRate,
        Metric::DeltaV,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Metric::TotalReward => "Total Reward",
            Metric::InspectedPoints => "Inspected Points",
            Metric::EpisodeLength => "Episode Length (steps)",
            Metric::SuccessRate => "Success Rate",
            Metric::DeltaV => "Delta V (m/s)",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Metric::TotalReward => "total_reward",
            Metric::InspectedPoints => "inspected_points",
            Metric::EpisodeLength => "episode_length",
            Metric::SuccessRate => "success_rate",
            Metric::DeltaV => "delta_v",
        }
    }

    pub fn parse(key: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.key() == key)
    }

    pub fn of_episode(self, e: &EpisodeMetrics) -> f64 {
        match self {
            Metric::TotalReward => e.total_reward,
            Metric::InspectedPoints => e.inspected_points as f64,
            Metric::EpisodeLength => e.episode_length as f64,
            Metric::SuccessRate => f64::from(u8::from(e.success)),
            Metric::DeltaV => e.delta_v,
        }
    }

    pub fn of_iteration(self, m: &IterationMetrics) -> f64 {
        match self {
            Metric::TotalReward => m.mean_reward,
            Metric::InspectedPoints => m.mean_inspected,
            Metric::EpisodeLength => m.mean_length,
            Metric::SuccessRate => m.success_rate,
            Metric::DeltaV => m.mean_delta_v,
        }
    }
}

/// One seed's training log and final evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config_name: String,
    pub seed: u64,
    pub iterations: Vec<IterationMetrics>,
    pub eval: Vec<EpisodeMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub timestep: u64,
    pub stat: AggregateStat,
}

fn check_single_config(records: &[RunRecord]) -> Result<&str, StatsError> {
    let first = records.first().ok_or(StatsError::NoRecords)?;
    if let Some(other) = records.iter().find(|r| r.config_name != first.config_name) {
        return Err(StatsError::MixedConfigs(
            first.config_name.clone(),
            other.config_name.clone(),
        ));
    }
    Ok(&first.config_name)
}

/// Per-iteration IQM and interval across seeds, truncated to the shortest run.
pub fn sample_complexity(
    records: &[RunRecord],
    metric: Metric,
    resamples: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>, StatsError> {
    check_single_config(records)?;
    let len = records
        .iter()
        .map(|r| r.iterations.len())
        .min()
        .unwrap_or(0);
    let mut curve = Vec::with_capacity(len);
    for i in 0..len {
        let row = &records[0].iterations[i];
        let values: Vec<f64> = records
            .iter()
            .map(|r| metric.of_iteration(&r.iterations[i]))
            .filter(|v| v.is_finite())
            .collect();
        if values.is_empty() {
            continue;
        }
        curve.push(CurvePoint {
            iteration: row.iteration,
            timestep: row.timesteps,
            stat: aggregate(&values, resamples, seed)?,
        });
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pooling {
    /// Every evaluation episode of every seed is one sample.
    Episodes,
    /// Each seed contributes the mean of its evaluation episodes.
    SeedMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub config_name: String,
    pub label: String,
    pub seeds: usize,
    pub stats: Vec<(Metric, AggregateStat)>,
}

/// Final-policy table, one row per config in order of first appearance.
/// Configs without evaluation data are skipped with a warning.
pub fn final_policy_table(
    records: &[RunRecord],
    pooling: Pooling,
    resamples: usize,
    seed: u64,
) -> Result<Vec<TableRow>, StatsError> {
    if records.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.config_name.as_str()) {
            order.push(&r.config_name);
        }
    }
    let mut rows = Vec::new();
    for name in order {
        let group: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.config_name == name && !r.eval.is_empty())
            .collect();
        if group.is_empty() {
            log::warn!("no evaluation data for config `{name}`; row skipped");
            continue;
        }
        let mut stats = Vec::with_capacity(Metric::ALL.len());
        for metric in Metric::ALL {
            let values: Vec<f64> = match pooling {
                Pooling::Episodes => group
                    .iter()
                    .flat_map(|r| r.eval.iter().map(|e| metric.of_episode(e)))
                    .collect(),
                Pooling::SeedMeans => group
                    .iter()
                    .map(|r| {
                        r.eval.iter().map(|e| metric.of_episode(e)).sum::<f64>()
                            / r.eval.len() as f64
                    })
                    .collect(),
            };
            stats.push((metric, aggregate(&values, resamples, seed)?));
        }
        rows.push(TableRow {
            config_name: name.to_string(),
            label: display_label(name).unwrap_or(name).to_string(),
            seeds: group.len(),
            stats,
        });
    }
    Ok(rows)
}

/// Aligned plain-text table: labels left-aligned, cells right-aligned.
pub fn render_table(rows: &[TableRow]) -> String {
    let mut header = vec!["Metric Labels".to_string()];
    header.extend(Metric::ALL.iter().map(|m| m.label().to_string()));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.label.clone()];
            cells.extend(r.stats.iter().map(|(_, s)| s.table_cell()));
            cells
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&body) {
        let mut line = String::new();
        for (j, (c, w)) in row.iter().zip(&widths).enumerate() {
            if j == 0 {
                let _ = write!(line, "{c:<w$}");
            } else {
                let _ = write!(line, "  {c:>w$}");
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub const TABLE_CSV_HEADER: [&str; 7] =
    ["config", "metric", "iqm", "ci_low", "ci_high", "n", "seeds"];
pub const CURVE_CSV_HEADER: [&str; 6] = ["iteration", "timestep", "iqm", "ci_low", "ci_high", "n"];

pub fn write_table_csv(path: &Path, rows: &[TableRow]) -> Result<(), IoError> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| IoError::malformed("table csv", path, e))?;
    let err = |e: csv::Error| IoError::malformed("table csv", path, e);
    w.write_record(TABLE_CSV_HEADER).map_err(err)?;
    for r in rows {
        for (m, s) in &r.stats {
            w.write_record([
                r.config_name.clone(),
                m.key().to_string(),
                s.iqm.to_string(),
                s.ci_low.to_string(),
                s.ci_high.to_string(),
                s.n.to_string(),
                r.seeds.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<(), IoError> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| IoError::malformed("curve csv", path, e))?;
    let err = |e: csv::Error| IoError::malformed("curve csv", path, e);
    w.write_record(CURVE_CSV_HEADER).map_err(err)?;
    for p in curve {
        w.write_record([
            p.iteration.to_string(),
            p.timestep.to_string(),
            p.stat.iqm.to_string(),
            p.stat.ci_low.to_string(),
            p.stat.ci_high.to_string(),
            p.stat.n.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

pub fn write_metrics_csv(path: &Path, rows: &[IterationMetrics]) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| IoError::malformed("metrics csv", path, e))?;
    let err = |e: csv::Error| IoError::malformed("metrics csv", path, e);
    w.write_record(METRICS_HEADER).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

/// Appends one row to an existing metrics file, writing the header first if
/// the file is new.
pub fn append_metrics_row(path: &Path, row: &IterationMetrics) -> Result<(), IoError> {
    let exists = path.exists();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| IoError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    let err = |e: csv::Error| IoError::malformed("metrics csv", path, e);
    if !exists {
        w.write_record(METRICS_HEADER).map_err(err)?;
    }
    w.serialize(row).map_err(err)?;
    w.flush().map_err(|e| IoError::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<IterationMetrics>, IoError> {
    let mut r =
        csv::Reader::from_path(path).map_err(|e| IoError::malformed("metrics csv", path, e))?;
    let headers = r
        .headers()
        .map_err(|e| IoError::malformed("metrics csv", path, e))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != METRICS_HEADER {
        return Err(IoError::malformed(
            "metrics csv",
            path,
            format!("unexpected header {headers:?}"),
        ));
    }
    let rows: Vec<IterationMetrics> = r
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| IoError::malformed("metrics csv", path, e))?;
    if rows.windows(2).any(|w| w[1].iteration <= w[0].iteration) {
        return Err(IoError::malformed(
            "metrics csv",
            path,
            "iteration index is not strictly increasing",
        ));
    }
    Ok(rows)
}
