use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::report::{Aggregate, EvalReport};
use crate::error::{contract, Result};
use crate::tasks::{CostVariant, TaskId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskComparison {
    pub task: TaskId,
    pub episode_length_s: f64,
    pub a_variant: CostVariant,
    pub b_variant: CostVariant,
    pub a_score: Aggregate,
    pub b_score: Aggregate,
    /// `a - b` for each score statistic.
    pub mean_delta: f64,
    pub median_delta: f64,
    pub a_smoothness: Aggregate,
    pub b_smoothness: Aggregate,
    pub smoothness_delta: f64,
    /// The first report's median score is below the second's.
    pub a_below_b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub tasks: Vec<TaskComparison>,
}

/// Pairs the runs of two reports by task and reports `a - b` deltas.
///
/// Every task in `a` must appear in `b` with the same episode length.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    if a.runs.is_empty() {
        return Err(contract("first report has no runs"));
    }
    let mut tasks = Vec::new();
    for ra in &a.runs {
        let rb = b
            .runs
            .iter()
            .find(|r| r.task == ra.task)
            .ok_or_else(|| contract(format!("second report has no '{}' run", ra.task)))?;
        if ra.episode_length_s != rb.episode_length_s {
            return Err(contract(format!(
                "'{}' episode lengths differ: {} s vs {} s",
                ra.task, ra.episode_length_s, rb.episode_length_s
            )));
        }
        tasks.push(TaskComparison {
            task: ra.task,
            episode_length_s: ra.episode_length_s,
            a_variant: ra.variant,
            b_variant: rb.variant,
            a_score: ra.score,
            b_score: rb.score,
            mean_delta: ra.score.mean - rb.score.mean,
            median_delta: ra.score.median - rb.score.median,
            a_smoothness: ra.smoothness,
            b_smoothness: rb.smoothness,
            smoothness_delta: ra.smoothness.mean - rb.smoothness.mean,
            a_below_b: ra.score.median < rb.score.median,
        });
    }
    Ok(Comparison { tasks })
}

impl Comparison {
    /// Fixed-width console table: task, each side's score mean ± std, the median delta and smoothness.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>22} {:>22} {:>12} {:>24}",
            "task", "length", "A score", "B score", "median d", "smoothness A / B"
        );
        for t in &self.tasks {
            let a = format!("{} {:.1} ± {:.1}", t.a_variant, t.a_score.mean, t.a_score.std);
            let b = format!("{} {:.1} ± {:.1}", t.b_variant, t.b_score.mean, t.b_score.std);
            let s = format!("{:.3} / {:.3}", t.a_smoothness.mean, t.b_smoothness.mean);
            let flag = if t.a_below_b { " !" } else { "" };
            let _ = writeln!(
                out,
                "{:<8} {:>7.1}s {:>22} {:>22} {:>+12.2} {:>24}{flag}",
                t.task.as_str(),
                t.episode_length_s,
                a,
                b,
                t.median_delta,
                s
            );
        }
        out
    }
}
