use serde::{Deserialize, Serialize};

use super::episode::{mean_step_reward, run_seed, score, EpisodeRecord};
use crate::error::{contract, Result};
use crate::planners::PlannerConfig;
use crate::tasks::TaskSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub length_s: f64,
    pub seed: u64,
    pub score: f64,
    pub mean_step_reward: f64,
    pub diverged: bool,
}

/// Scores per (length, seed) plus the per-step reward series of the longest length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurves {
    pub lengths_s: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Length-major: all seeds of the first length, then the next length.
    pub points: Vec<SweepPoint>,
    pub control_dt: f64,
    /// Median over seeds of the reward at each step of the longest episode.
    pub median_series: Vec<f64>,
    pub min_series: Vec<f64>,
    pub max_series: Vec<f64>,
}

impl SweepCurves {
    pub fn scores_at(&self, length_s: f64) -> Vec<f64> {
        self.points.iter().filter(|p| p.length_s == length_s).map(|p| p.score).collect()
    }

    /// Median over seeds of the per-step reward over the last `window_s` of the longest episode.
    pub fn final_window_median(&self, window_s: f64) -> f64 {
        let n = (window_s / self.control_dt).round() as usize;
        let tail = &self.median_series[self.median_series.len().saturating_sub(n)..];
        if tail.is_empty() {
            0.0
        } else {
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Builds sweep curves from one longest-length record per seed.
///
/// Replanning does not depend on the episode length, so each shorter episode is exactly the
/// prefix of the longest one under the same seed.
pub fn sweep_from_records(lengths_s: &[f64], records: &[EpisodeRecord]) -> Result<SweepCurves> {
    if lengths_s.is_empty() || lengths_s.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(contract("sweep lengths must be non-empty and strictly ascending"));
    }
    let longest = *lengths_s.last().unwrap();
    let dt = records.first().map(|r| r.meta.control_dt).ok_or_else(|| contract("sweep needs at least one seed"))?;
    if let Some(r) = records.iter().find(|r| (r.meta.length_s - longest).abs() > 1e-9) {
        return Err(contract(format!("record for seed {} has length {} s, expected {longest} s", r.meta.seed, r.meta.length_s)));
    }
    let mut points = Vec::with_capacity(lengths_s.len() * records.len());
    for &len in lengths_s {
        let steps = crate::tasks::steps_for(len, dt)?;
        for r in records {
            let p = r.prefix(steps);
            points.push(SweepPoint {
                length_s: len,
                seed: r.meta.seed,
                score: score(&p),
                mean_step_reward: mean_step_reward(&p),
                diverged: p.diverged_at.is_some(),
            });
        }
    }
    let series: Vec<Vec<f64>> = records.iter().map(|r| r.reward_series()).collect();
    let n = series.iter().map(Vec::len).max().unwrap_or(0);
    let mut median_series = Vec::with_capacity(n);
    let mut min_series = Vec::with_capacity(n);
    let mut max_series = Vec::with_capacity(n);
    for t in 0..n {
        let at: Vec<f64> = series.iter().filter_map(|s| s.get(t).copied()).collect();
        median_series.push(median(&at));
        min_series.push(at.iter().copied().fold(f64::INFINITY, f64::min));
        max_series.push(at.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(SweepCurves {
        lengths_s: lengths_s.to_vec(),
        seeds: records.iter().map(|r| r.meta.seed).collect(),
        points,
        control_dt: dt,
        median_series,
        min_series,
        max_series,
    })
}

/// Runs the longest length once per seed and derives every shorter length from its prefix.
pub fn episode_length_sweep(task: &TaskSpec, config: &PlannerConfig, lengths_s: &[f64], seeds: &[u64]) -> Result<(SweepCurves, Vec<EpisodeRecord>)> {
    let longest = *lengths_s.last().ok_or_else(|| contract("sweep lengths must be non-empty"))?;
    let records = seeds.iter().map(|&s| run_seed(task, config, longest, s)).collect::<Result<Vec<_>>>()?;
    Ok((sweep_from_records(lengths_s, &records)?, records))
}
