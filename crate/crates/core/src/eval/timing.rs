use serde::{Deserialize, Serialize};

use super::episode::EpisodeRecord;
use crate::planners::PlannerKind;
use crate::tasks::TaskId;

/// One row of the inference-time table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub task: TaskId,
    pub episode_length_s: f64,
    pub planner: PlannerKind,
    pub iterations: usize,
    pub horizon_s: f64,
    pub episodes: usize,
    pub planner_calls: usize,
    pub planner_iterations: usize,
    /// Mean over episodes of the summed planning wall-time.
    pub inference_time_s: f64,
    pub mean_call_s: f64,
    pub min_call_s: f64,
    pub max_call_s: f64,
}

impl TimingRow {
    fn key(&self) -> (TaskId, u64, PlannerKind, usize, u64) {
        (self.task, self.episode_length_s.to_bits(), self.planner, self.iterations, self.horizon_s.to_bits())
    }
}

/// Groups records by (task, episode length, planner, iterations, horizon), in first-seen order.
pub fn timing_report(records: &[EpisodeRecord]) -> Vec<TimingRow> {
    let mut rows: Vec<TimingRow> = Vec::new();
    // (summed wall-time, timed calls) per row
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for r in records {
        let m = &r.meta;
        let fresh = TimingRow {
            task: m.task,
            episode_length_s: m.length_s,
            planner: m.planner,
            iterations: m.iterations,
            horizon_s: m.horizon_s,
            episodes: 0,
            planner_calls: 0,
            planner_iterations: 0,
            inference_time_s: 0.0,
            mean_call_s: 0.0,
            min_call_s: f64::INFINITY,
            max_call_s: f64::NEG_INFINITY,
        };
        let idx = match rows.iter().position(|row| row.key() == fresh.key()) {
            Some(i) => i,
            None => {
                rows.push(fresh);
                sums.push((0.0, 0));
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        row.episodes += 1;
        row.planner_calls += r.planner_calls;
        row.planner_iterations += r.planner_iterations;
        for t in r.plan_times() {
            sums[idx].0 += t;
            sums[idx].1 += 1;
            row.min_call_s = row.min_call_s.min(t);
            row.max_call_s = row.max_call_s.max(t);
        }
    }
    for (row, (total, timed)) in rows.iter_mut().zip(sums) {
        row.inference_time_s = total / row.episodes as f64;
        if timed > 0 {
            row.mean_call_s = total / timed as f64;
        } else {
            row.min_call_s = 0.0;
            row.max_call_s = 0.0;
        }
    }
    rows
}
