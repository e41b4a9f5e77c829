//! Evaluation protocol: episodes, scores, smoothness, episode-length sweeps, timing and reports.

mod compare;
mod csv_out;
mod episode;
mod report;
mod sweep;
mod timing;

pub use compare::{compare, Comparison, TaskComparison};
pub use csv_out::{reward_series_csv, scores_csv, smoothness_csv, strip_columns, sweep_csv, timing_csv, TIMING_COLUMNS};
pub use episode::{mean_step_reward, run_episode, run_seed, score, smoothness, EpisodeMeta, EpisodeRecord, RespawnEvent, StepRecord};
pub use report::{Aggregate, EvalReport, RunReport, SeedResult, SCHEMA};
pub use sweep::{episode_length_sweep, median, sweep_from_records, SweepCurves, SweepPoint};
pub use timing::{timing_report, TimingRow};
