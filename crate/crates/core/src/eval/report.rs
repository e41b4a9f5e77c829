use serde::{Deserialize, Serialize};

use super::episode::{mean_step_reward, score, smoothness, EpisodeRecord};
use super::sweep::{median, SweepCurves};
use super::timing::{timing_report, TimingRow};
use crate::error::{contract, Error, Result};
use crate::planners::PlannerKind;
use crate::tasks::{CostVariant, TaskId};

pub const SCHEMA: &str = "horizon-bench/report/v1";

const AGGREGATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, median: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, median: median(values), std }
    }

    fn close_to(&self, other: &Self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= AGGREGATE_TOL * a.abs().max(b.abs()).max(1.0);
        close(self.mean, other.mean) && close(self.median, other.median) && close(self.std, other.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub score: f64,
    pub mean_step_reward: f64,
    pub smoothness: f64,
    pub steps: usize,
    pub termination_step: Option<usize>,
    pub diverged_at: Option<usize>,
    pub respawns: usize,
    pub planner_calls: usize,
    pub planner_iterations: usize,
    pub degraded_calls: usize,
    pub inference_time_s: f64,
}

impl SeedResult {
    pub fn from_record(r: &EpisodeRecord) -> Self {
        Self {
            seed: r.meta.seed,
            score: score(r),
            mean_step_reward: mean_step_reward(r),
            smoothness: smoothness(r),
            steps: r.steps.len(),
            termination_step: r.termination_step,
            diverged_at: r.diverged_at,
            respawns: r.respawns.len(),
            planner_calls: r.planner_calls,
            planner_iterations: r.planner_iterations,
            degraded_calls: r.degraded_calls.len(),
            inference_time_s: r.plan_times().sum(),
        }
    }
}

/// All seeds of one (task, cost variant, planner, episode length) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: TaskId,
    pub variant: CostVariant,
    pub planner: PlannerKind,
    pub iterations: usize,
    pub horizon_s: f64,
    pub episode_length_s: f64,
    pub per_seed: Vec<SeedResult>,
    pub score: Aggregate,
    pub mean_step_reward: Aggregate,
    pub smoothness: Aggregate,
}

impl RunReport {
    pub fn from_records(records: &[EpisodeRecord]) -> Result<Self> {
        let first = records.first().ok_or_else(|| contract("a run needs at least one episode"))?;
        let m = &first.meta;
        for r in records {
            let o = &r.meta;
            if (o.task, o.variant, o.planner, o.iterations) != (m.task, m.variant, m.planner, m.iterations)
                || o.horizon_s != m.horizon_s
                || o.length_s != m.length_s
            {
                return Err(contract("records of one run must share task, variant, planner and length"));
            }
        }
        let per_seed: Vec<SeedResult> = records.iter().map(SeedResult::from_record).collect();
        let mut run = Self {
            task: m.task,
            variant: m.variant,
            planner: m.planner,
            iterations: m.iterations,
            horizon_s: m.horizon_s,
            episode_length_s: m.length_s,
            per_seed,
            score: Aggregate::of(&[]),
            mean_step_reward: Aggregate::of(&[]),
            smoothness: Aggregate::of(&[]),
        };
        (run.score, run.mean_step_reward, run.smoothness) = run.recompute();
        Ok(run)
    }

    fn column(&self, f: impl Fn(&SeedResult) -> f64) -> Vec<f64> {
        self.per_seed.iter().map(f).collect()
    }

    fn recompute(&self) -> (Aggregate, Aggregate, Aggregate) {
        (
            Aggregate::of(&self.column(|s| s.score)),
            Aggregate::of(&self.column(|s| s.mean_step_reward)),
            Aggregate::of(&self.column(|s| s.smoothness)),
        )
    }

    pub fn scores(&self) -> Vec<f64> {
        self.column(|s| s.score)
    }

    pub fn any_diverged(&self) -> bool {
        self.per_seed.iter().any(|s| s.diverged_at.is_some())
    }
}

/// Versioned document written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    /// The fully resolved experiment configuration that produced this report.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunReport>,
    pub timing: Vec<TimingRow>,
    pub sweep: Option<SweepCurves>,
}

impl EvalReport {
    pub fn new(config: serde_json::Value, seeds: Vec<u64>, groups: &[Vec<EpisodeRecord>], sweep: Option<SweepCurves>) -> Result<Self> {
        let runs = groups.iter().map(|g| RunReport::from_records(g)).collect::<Result<Vec<_>>>()?;
        let all: Vec<EpisodeRecord> = groups.iter().flatten().cloned().collect();
        Ok(Self { schema: SCHEMA.into(), config, seeds, runs, timing: timing_report(&all), sweep })
    }

    /// Aggregates must be recomputable from the per-seed entries.
    pub fn check(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported report schema '{}', expected '{SCHEMA}'", self.schema)));
        }
        for run in &self.runs {
            let (score, msr, smooth) = run.recompute();
            if !(score.close_to(&run.score) && msr.close_to(&run.mean_step_reward) && smooth.close_to(&run.smoothness)) {
                return Err(contract(format!("stored aggregates of {}-{} do not match the per-seed entries", run.variant, run.task)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| contract(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed report: {e}")))?;
        report.check()?;
        Ok(report)
    }

    pub fn any_diverged(&self) -> bool {
        self.runs.iter().any(RunReport::any_diverged)
    }
}
