//! Flat CSV tables. Column order is part of the output contract.

use serde::Serialize;

use super::report::EvalReport;
use super::sweep::SweepCurves;
use super::timing::TimingRow;
use crate::error::{contract, Result};
use crate::planners::PlannerKind;
use crate::tasks::{CostVariant, TaskId};

/// Columns holding wall-clock measurements; everything else is deterministic.
pub const TIMING_COLUMNS: [&str; 4] = ["inference_time_s", "mean_call_s", "min_call_s", "max_call_s"];

#[derive(Serialize)]
struct ScoreRow {
    task: TaskId,
    variant: CostVariant,
    planner: PlannerKind,
    seed: u64,
    length_s: f64,
    score: f64,
    mean_step_reward: f64,
}

#[derive(Serialize)]
struct SmoothnessRow {
    task: TaskId,
    variant: CostVariant,
    planner: PlannerKind,
    seed: u64,
    length_s: f64,
    smoothness: f64,
}

#[derive(Serialize)]
struct SweepRow {
    task: TaskId,
    variant: CostVariant,
    planner: PlannerKind,
    seed: u64,
    length_s: f64,
    score: f64,
    mean_step_reward: f64,
    diverged: bool,
}

#[derive(Serialize)]
struct SeriesRow {
    step: usize,
    time_s: f64,
    median_reward: f64,
    min_reward: f64,
    max_reward: f64,
}

fn write<T: Serialize>(rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut any = false;
    for row in rows {
        w.serialize(row).map_err(|e| contract(e.to_string()))?;
        any = true;
    }
    if !any {
        w.write_record(header).map_err(|e| contract(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| contract(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| contract(e.to_string()))
}

pub fn scores_csv(report: &EvalReport) -> Result<String> {
    let rows = report.runs.iter().flat_map(|run| {
        run.per_seed.iter().map(move |s| ScoreRow {
            task: run.task,
            variant: run.variant,
            planner: run.planner,
            seed: s.seed,
            length_s: run.episode_length_s,
            score: s.score,
            mean_step_reward: s.mean_step_reward,
        })
    });
    write(rows, &["task", "variant", "planner", "seed", "length_s", "score", "mean_step_reward"])
}

pub fn smoothness_csv(report: &EvalReport) -> Result<String> {
    let rows = report.runs.iter().flat_map(|run| {
        run.per_seed.iter().map(move |s| SmoothnessRow {
            task: run.task,
            variant: run.variant,
            planner: run.planner,
            seed: s.seed,
            length_s: run.episode_length_s,
            smoothness: s.smoothness,
        })
    });
    write(rows, &["task", "variant", "planner", "seed", "length_s", "smoothness"])
}

pub fn timing_csv(rows: &[TimingRow]) -> Result<String> {
    write(
        rows,
        &[
            "task",
            "episode_length_s",
            "planner",
            "iterations",
            "horizon_s",
            "episodes",
            "planner_calls",
            "planner_iterations",
            "inference_time_s",
            "mean_call_s",
            "min_call_s",
            "max_call_s",
        ],
    )
}

pub fn sweep_csv(report: &EvalReport) -> Result<String> {
    let sweep = report.sweep.as_ref().ok_or_else(|| contract("report has no sweep"))?;
    let run = report.runs.first().ok_or_else(|| contract("report has no runs"))?;
    let rows = sweep.points.iter().map(|p| SweepRow {
        task: run.task,
        variant: run.variant,
        planner: run.planner,
        seed: p.seed,
        length_s: p.length_s,
        score: p.score,
        mean_step_reward: p.mean_step_reward,
        diverged: p.diverged,
    });
    write(rows, &["task", "variant", "planner", "seed", "length_s", "score", "mean_step_reward", "diverged"])
}

/// Per-step reward statistics over seeds for the longest sweep length.
pub fn reward_series_csv(sweep: &SweepCurves) -> Result<String> {
    let rows = (0..sweep.median_series.len()).map(|t| SeriesRow {
        step: t,
        time_s: (t + 1) as f64 * sweep.control_dt,
        median_reward: sweep.median_series[t],
        min_reward: sweep.min_series[t],
        max_reward: sweep.max_series[t],
    });
    write(rows, &["step", "time_s", "median_reward", "min_reward", "max_reward"])
}

/// Drops the named columns from a CSV document, for comparisons that ignore wall-times.
pub fn strip_columns(text: &str, drop: &[&str]) -> Result<String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| contract(e.to_string()))?.clone();
    let keep: Vec<usize> = header.iter().enumerate().filter(|(_, h)| !drop.contains(h)).map(|(i, _)| i).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let pick = |rec: &csv::StringRecord| keep.iter().map(|&i| rec[i].to_string()).collect::<Vec<_>>();
    w.write_record(pick(&header)).map_err(|e| contract(e.to_string()))?;
    for rec in r.records() {
        let rec = rec.map_err(|e| contract(e.to_string()))?;
        w.write_record(pick(&rec)).map_err(|e| contract(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| contract(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| contract(e.to_string()))
}
