//! The four subcommands. Each returns the files it wrote; exit-code mapping lives in `main`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use horizon_bench::eval::{
    compare as compare_reports, reward_series_csv, run_seed, scores_csv, smoothness_csv, sweep_csv, sweep_from_records, timing_csv,
    EpisodeRecord, EvalReport, TimingRow,
};
use horizon_bench::planners::PlannerConfig;
use horizon_bench::tasks::TaskSpec;

use crate::config::{ConfigError, Experiment};
use crate::output::write_atomic;

#[derive(Debug, Clone)]
pub struct Options {
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
    pub jobs: usize,
    /// Treat a diverged episode as a runtime failure.
    pub strict: bool,
    pub seed_offset: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self { out: None, jobs: 1, strict: false, seed_offset: 0 }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub report: EvalReport,
    pub files: Vec<PathBuf>,
    /// Console summary.
    pub summary: String,
}

/// A diverged episode under `--strict`; maps to exit code 1.
#[derive(Debug)]
pub struct Diverged(pub String);

impl std::fmt::Display for Diverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "diverged episodes in {}", self.0)
    }
}

impl std::error::Error for Diverged {}

fn out_dir(exp: &Experiment, opts: &Options) -> PathBuf {
    opts.out.clone().or_else(|| exp.out.clone()).unwrap_or_else(|| Path::new("out").join(&exp.name))
}

fn seeds(exp: &Experiment, opts: &Options) -> Vec<u64> {
    exp.seeds.iter().map(|s| s + opts.seed_offset).collect()
}

/// Runs one episode per seed on up to `jobs` threads. Results come back in seed order.
pub fn run_seeds(task: &TaskSpec, planner: &PlannerConfig, length_s: f64, seeds: &[u64], jobs: usize) -> Result<Vec<EpisodeRecord>> {
    let jobs = jobs.clamp(1, seeds.len().max(1));
    let mut slots: Vec<Option<horizon_bench::Result<EpisodeRecord>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                scope.spawn(move || {
                    (j..seeds.len()).step_by(jobs).map(|i| (i, run_seed(task, planner, length_s, seeds[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("episode thread panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .zip(seeds)
        .map(|(r, s)| r.expect("every seed ran").with_context(|| format!("{} seed {s}", task.id)))
        .collect()
}

fn finish(report: EvalReport, files: Vec<(&str, String)>, dir: &Path, summary: String, opts: &Options) -> Result<Outcome> {
    let mut written = Vec::new();
    let json = report.to_json()?;
    for (name, text) in std::iter::once(("report.json", json)).chain(files) {
        let path = dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    if opts.strict && report.any_diverged() {
        return Err(Diverged(dir.display().to_string()).into());
    }
    Ok(Outcome { report, files: written, summary })
}

fn run_summary(report: &EvalReport) -> String {
    let mut s = format!("{:<8} {:<6} {:<9} {:>6} {:>22} {:>10} {:>10} {:>12}\n", "task", "cost", "planner", "length", "score", "median", "per step", "smoothness");
    for r in &report.runs {
        let _ = writeln!(
            s,
            "{:<8} {:<6} {:<9} {:>5.1}s {:>22} {:>10.2} {:>10.4} {:>12.4}{}",
            r.task.as_str(),
            r.variant.as_str(),
            r.planner.as_str(),
            r.episode_length_s,
            format!("{:.2} ± {:.2}", r.score.mean, r.score.std),
            r.score.median,
            r.mean_step_reward.median,
            r.smoothness.mean,
            if r.any_diverged() { "  diverged" } else { "" }
        );
    }
    s
}

/// Runs every seed at the configured episode length.
pub fn run(exp: &Experiment, opts: &Options) -> Result<Outcome> {
    let task = exp.task_spec()?;
    let seeds = seeds(exp, opts);
    let records = run_seeds(&task, &exp.planner, exp.episode_length_s, &seeds, opts.jobs)?;
    let report = EvalReport::new(exp.to_json(), seeds, &[records], None)?;
    let files = vec![
        ("scores.csv", scores_csv(&report)?),
        ("smoothness.csv", smoothness_csv(&report)?),
        ("timing.csv", timing_csv(&report.timing)?),
    ];
    let summary = run_summary(&report);
    finish(report, files, &out_dir(exp, opts), summary, opts)
}

/// Runs the longest sweep length once per seed; shorter lengths are its prefixes.
pub fn sweep(exp: &Experiment, opts: &Options) -> Result<Outcome> {
    let task = exp.task_spec()?;
    let seeds = seeds(exp, opts);
    let longest = *exp.sweep_lengths_s.last().expect("validated non-empty");
    let records = run_seeds(&task, &exp.planner, longest, &seeds, opts.jobs)?;
    let curves = sweep_from_records(&exp.sweep_lengths_s, &records)?;
    let series = reward_series_csv(&curves)?;
    let report = EvalReport::new(exp.to_json(), seeds, &[records], Some(curves))?;
    let mut summary = run_summary(&report);
    let curves = report.sweep.as_ref().expect("just set");
    for &l in &curves.lengths_s {
        let _ = writeln!(summary, "  {:>5.1}s  median score {:.2}", l, horizon_bench::eval::median(&curves.scores_at(l)));
    }
    let _ = writeln!(summary, "  median per-step reward over the final 2 s: {:.4}", curves.final_window_median(2.0));
    let files = vec![
        ("sweep.csv", sweep_csv(&report)?),
        ("reward_series.csv", series),
        ("scores.csv", scores_csv(&report)?),
        ("timing.csv", timing_csv(&report.timing)?),
    ];
    finish(report, files, &out_dir(exp, opts), summary, opts)
}

fn timing_summary(rows: &[TimingRow]) -> String {
    let mut s = format!(
        "{:<8} {:>7} {:<9} {:>5} {:>8} {:>7} {:>10} {:>14} {:>12}\n",
        "task", "length", "planner", "iter", "horizon", "calls", "iter.calls", "inference s", "per call ms"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:>6.1}s {:<9} {:>5} {:>7.2}s {:>7} {:>10} {:>14.3} {:>12.3}",
            r.task.as_str(),
            r.episode_length_s,
            r.planner.as_str(),
            r.iterations,
            r.horizon_s,
            r.planner_calls,
            r.planner_iterations,
            r.inference_time_s,
            1e3 * r.mean_call_s
        );
    }
    s
}

/// Runs each bench cell over the configured seeds and tabulates planning wall-time.
pub fn bench(exp: &Experiment, opts: &Options) -> Result<Outcome> {
    if exp.bench.is_empty() {
        return Err(ConfigError(format!("config '{}' has no [[bench]] cells", exp.name)).into());
    }
    let seeds = seeds(exp, opts);
    let mut groups = Vec::with_capacity(exp.bench.len());
    for cell in &exp.bench {
        let task = exp.cell_task_spec(cell)?;
        groups.push(run_seeds(&task, &cell.planner, cell.episode_length_s, &seeds, opts.jobs)?);
    }
    let report = EvalReport::new(exp.to_json(), seeds, &groups, None)?;
    let summary = timing_summary(&report.timing);
    let files = vec![("timing.csv", timing_csv(&report.timing)?)];
    finish(report, files, &out_dir(exp, opts), summary, opts)
}

/// Reads two reports, writes `comparison.json` into `out` and returns the console table.
pub fn compare(a: &Path, b: &Path, out: &Path) -> Result<(PathBuf, String)> {
    let load = |p: &Path| -> Result<EvalReport> {
        let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("cannot read report {}: {e}", p.display())))?;
        EvalReport::from_json(&text).map_err(|e| ConfigError(format!("{}: {e}", p.display())).into())
    };
    let (ra, rb) = (load(a)?, load(b)?);
    let cmp = compare_reports(&ra, &rb).map_err(|e| ConfigError(format!("reports are not comparable: {e}")))?;
    let path = out.join("comparison.json");
    write_atomic(&path, serde_json::to_string_pretty(&cmp)?.as_bytes())?;
    Ok((path, cmp.table()))
}
