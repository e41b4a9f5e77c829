use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use horizon_bench::eval::{strip_columns, EvalReport, TIMING_COLUMNS};

const STAND: &str = r#"
version = 1
name = "mini"
task = "stand"
variant = "ours"
episode_length_s = 0.2
seeds = [0]
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_horizon-bench"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("exp.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn data_rows(csv: &str) -> usize {
    csv.lines().count() - 1
}

#[test]
fn run_writes_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    let out = dir.path().join("o");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let scores = read(out.join("scores.csv"));
    assert_eq!(data_rows(&scores), 1);
    assert!(scores.starts_with("task,variant,planner,seed,length_s,score,mean_step_reward\n"));
    for f in ["smoothness.csv", "timing.csv", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report = EvalReport::from_json(&read(out.join("report.json"))).unwrap();
    assert_eq!(report.config["name"], "mini");
    assert_eq!(report.seeds, vec![0]);
    assert_eq!(report.runs[0].per_seed[0].planner_calls, 10);
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{STAND}horizon = 3\n"));
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon"), "{}", stderr(&o));

    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--set", "planner.horizon=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_problems_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["run"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = run(&["compare", "nope_a.json", "nope_b.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), STAND);
    // stand configs have no bench grid
    assert_eq!(run(&["bench", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn repeated_runs_match_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    let seeds = "seeds=[0, 1, 2]";
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = run(&["run", "--config", cfg.to_str().unwrap(), "--set", seeds, "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["scores.csv", "smoothness.csv"] {
        assert_eq!(read(a.join(f)), read(b.join(f)), "{f}");
    }
    let strip = |p: PathBuf| strip_columns(&read(p), &TIMING_COLUMNS).unwrap();
    assert_eq!(strip(a.join("timing.csv")), strip(b.join("timing.csv")));
}

#[test]
fn seed_offset_shifts_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    let out = dir.path().join("o");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--seed-offset", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(read(out.join("scores.csv")).contains(",10,"));
}

#[test]
fn sweep_rows_and_series_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    let out = dir.path().join("o");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "sweep_lengths_s=[0.1, 0.2, 0.3]",
        "--set",
        "seeds=[0, 1]",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&read(out.join("sweep.csv"))), 6);
    assert_eq!(data_rows(&read(out.join("reward_series.csv"))), 15);
}

#[test]
fn single_length_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    let (s, r) = (dir.path().join("s"), dir.path().join("r"));
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--set", "sweep_lengths_s=[0.2]", "--out", s.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", r.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(read(s.join("scores.csv")), read(r.join("scores.csv")));
}

#[test]
fn bench_honours_iteration_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{STAND}\n[[bench]]\ntask = \"stand\"\nplanner = \"ilqg\"\niterations = 3\nhorizon_s = 0.2\n\n[[bench]]\ntask = \"push\"\nplanner = \"sampling\"\niterations = 2\nhorizon_s = 0.3\n"
    );
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("o");
    let o = run(&["bench", "--config", cfg.to_str().unwrap(), "--set", "seeds=[0, 1]", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("timing.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    // 2 episodes x 10 steps per cell
    assert_eq!(&rows[0][3], "3");
    assert_eq!(&rows[0][6], "20");
    assert_eq!(&rows[0][7], "60");
    assert_eq!(&rows[1][2], "sampling");
    assert_eq!(&rows[1][7], "40");
}

#[test]
fn compare_self_gives_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    let out = dir.path().join("o");
    assert!(run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let report = out.join("report.json");
    let cmp = dir.path().join("cmp");
    let o = run(&["compare", report.to_str().unwrap(), report.to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("stand"));
    let v: serde_json::Value = serde_json::from_str(&read(cmp.join("comparison.json"))).unwrap();
    assert_eq!(v["tasks"][0]["median_delta"], 0.0);

    // a walk report cannot be compared against a stand report
    let walk = dir.path().join("w");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--set", "task=walk", "--out", walk.to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["compare", report.to_str().unwrap(), walk.join("report.json").to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_turns_divergence_into_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STAND);
    // a stiff contact at a coarse physics step blows up within a few steps
    let sets = ["--set", "biped.contact.stiffness=1e9", "--set", "biped.physics_dt=0.01"];
    let mut args = vec!["run", "--config", cfg.to_str().unwrap()];
    args.extend(sets);
    let out = dir.path().join("o");
    let o = run(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = EvalReport::from_json(&read(out.join("report.json"))).unwrap();
    assert!(report.any_diverged());
    let o = run(&[&args[..], &["--strict", "--out", out.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(1));
}
