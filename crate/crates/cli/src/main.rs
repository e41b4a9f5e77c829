use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use horizon_bench_cli::{commands, config, ConfigError, Options};

#[derive(Parser)]
#[command(name = "horizon-bench", version, about = "Run, sweep, compare and time biped MPC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. --set planner.iterations=4 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory (default: the config's `out`, else out/<name>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seeds run in parallel (default: available cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Exit 1 if any episode diverged
    #[arg(long, global = true)]
    strict: bool,
    /// Added to every configured seed
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed at the configured episode length
    Run,
    /// Episode-length sweep over the configured lengths
    Sweep,
    /// Compare two report.json files (A minus B)
    Compare { a: PathBuf, b: PathBuf },
    /// Time the configured [[bench]] grid
    Bench,
}

fn execute(cli: Cli) -> Result<()> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(ConfigError("--jobs must be at least 1".into()).into());
    }
    let opts = Options { out: cli.out.clone(), jobs, strict: cli.strict, seed_offset: cli.seed_offset };
    if let Command::Compare { a, b } = &cli.command {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out/compare"));
        let (path, table) = commands::compare(a, b, &out)?;
        print!("{table}");
        eprintln!("wrote {}", path.display());
        return Ok(());
    }
    let path = cli.config.as_ref().ok_or_else(|| ConfigError("--config is required".into()))?;
    let exp = config::load(path, &cli.sets)?;
    let outcome = match cli.command {
        Command::Run => commands::run(&exp, &opts)?,
        Command::Sweep => commands::sweep(&exp, &opts)?,
        Command::Bench => commands::bench(&exp, &opts)?,
        Command::Compare { .. } => unreachable!("handled above"),
    };
    print!("{}", outcome.summary);
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
