use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qdtree::experiment::{self, TreeSelector};

/// Evolve oblique decision trees with Q-learning leaves using GE or MAP-Elites.
#[derive(Parser)]
#[command(name = "qdtree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated experiments into OUT/run_{r}.
    Run(RunArgs),
    /// Average run directories into trend and map summaries.
    Aggregate {
        #[arg(long)]
        out: PathBuf,
        /// Run directories, or experiment directories containing run_* dirs.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
    /// Fill an archive a posteriori from a GE run's evaluation log.
    ProjectGeMap { dir: PathBuf },
    /// Re-evaluate a stored elite and write its simplified tree.
    ExportTree {
        dir: PathBuf,
        /// Archive cell as ENTROPY_BIN,DEPTH_BIN.
        #[arg(long, value_parser = parse_cell, conflicts_with = "best", required_unless_present = "best")]
        cell: Option<(usize, usize)>,
        #[arg(long)]
        best: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// ge or me.
    #[arg(long)]
    algo: Option<String>,
    /// cartpole or mountaincar.
    #[arg(long)]
    env: Option<String>,
    /// key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write evals.csv with every evaluated individual.
    #[arg(long)]
    log_all_evals: bool,
    /// Override any config key, e.g. --set total_pop=2000. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected ENTROPY_BIN,DEPTH_BIN")?;
    let a = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut overrides: Vec<(String, String)> = Vec::new();
    for kv in &args.set {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {kv:?}");
        };
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let flags = [
        ("algo", args.algo),
        ("env", args.env),
        ("seed", args.seed.map(|s| s.to_string())),
        ("runs", args.runs.map(|r| r.to_string())),
        ("out", args.out.map(|o| o.display().to_string())),
        ("log_all_evals", args.log_all_evals.then(|| "true".to_string())),
    ];
    overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));

    let config = experiment::load_config(args.config.as_deref(), &overrides)?;
    eprintln!(
        "{} on {}: runs {}, first seed {}, {} evaluations each, into {}",
        config.algorithm,
        config.env,
        config.n_runs,
        config.seed,
        config.ge.total_pop,
        config.out.display()
    );
    experiment::run_experiment(&config, |r| {
        let best = r.best_fitness.map(|f| f.to_string()).unwrap_or_else(|| "none".into());
        let coverage = r.archive.as_ref().map(|a| format!(", coverage {}", a.coverage())).unwrap_or_default();
        eprintln!("run {} (seed {}): best {best}{coverage}, {:.1}s", r.index, r.seed, r.elapsed.as_secs_f64());
    })?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Aggregate { out, dirs } => experiment::aggregate(&dirs, &out)
            .map(|s| {
                if !s.maps_written {
                    eprintln!("some runs have no archive.csv; wrote the trend summary only");
                }
                eprintln!("aggregated {} runs into {}", s.runs.len(), out.display());
            })
            .map_err(Into::into),
        Command::ProjectGeMap { dir } => experiment::project_ge_map(&dir)
            .map(|a| eprintln!("projected map covers {} of {} cells", a.len(), a.capacity()))
            .map_err(Into::into),
        Command::ExportTree { dir, cell, best } => {
            let selector = match (cell, best) {
                (Some((e, d)), _) => TreeSelector::Cell(e, d),
                _ => TreeSelector::Best,
            };
            experiment::export_tree(&dir, selector)
                .map(|t| {
                    print!("{}", t.text);
                    eprintln!("wrote {}", t.path.display());
                })
                .with_context(|| format!("exporting a tree from {}", dir.display()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdtree: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
