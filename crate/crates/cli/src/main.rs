use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kbrevise::experiment::{
    cmd_evaluate, cmd_explore, cmd_genpool, cmd_report, cmd_revise, run_pipeline, ExperimentConfig,
    Split,
};

#[derive(Parser)]
#[command(
    name = "kbrevise",
    version,
    about = "Rule-guided search experiments and offline rule-base revision"
)]
struct Cli {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for pool, split and search (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the problem pool and the train/test split.
    Genpool,
    /// Explore the training split with minimal pruning and store the traces.
    Explore,
    /// Revise a knowledge base from the stored traces.
    Revise {
        /// KB file or built-in name; every configured initial KB when omitted.
        #[arg(long)]
        kb: Option<String>,
    },
    /// Run a knowledge base live on one split.
    Evaluate {
        /// KB file or built-in name.
        #[arg(long)]
        kb: String,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Summarize every perf report of a run directory.
    Report {
        /// Run directory; the configured output directory when omitted.
        dir: Option<PathBuf>,
    },
    /// All stages in order, then the report.
    Run,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.reseed(seed);
    }
    cfg.check()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Genpool => {
            let pool = cmd_genpool(&cfg)?;
            println!("{} problems -> {}", pool.len(), cfg.pools_dir().display());
        }
        Command::Explore => {
            let n = cmd_explore(&cfg)?;
            println!("{n} traces -> {}", cfg.traces_dir().display());
        }
        Command::Revise { kb } => {
            let specs = match kb {
                Some(k) => vec![k.clone()],
                None => cfg.initial_kbs.clone(),
            };
            for spec in specs {
                let (path, r) =
                    cmd_revise(&cfg, &spec).with_context(|| format!("revising `{spec}`"))?;
                println!(
                    "{spec}: train perf {:.4} -> {:.4} ({} evaluations) -> {}",
                    r.before.perf,
                    r.after.perf,
                    r.evaluations,
                    path.display()
                );
            }
        }
        Command::Evaluate { kb, split } => {
            let (path, report) = cmd_evaluate(&cfg, kb, (*split).into())?;
            println!(
                "mean_sat {:.4} mean_states {:.2} perf {:.4} -> {}",
                report.mean_satisfaction,
                report.mean_states,
                report.perf,
                path.display()
            );
        }
        Command::Report { dir } => {
            let dir = dir.clone().unwrap_or_else(|| cfg.out.clone());
            let (_, table) = cmd_report(&dir)?;
            print!("{table}");
        }
        Command::Run => {
            run_pipeline(&cfg)?;
            print!("{}", cmd_report(&cfg.out)?.1);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
