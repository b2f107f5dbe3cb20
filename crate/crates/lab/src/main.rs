use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use denjoy_core::catalog::catalog_entries;
use denjoy_lab::{run_config, Config};

#[derive(Parser)]
#[command(name = "denjoy-lab", version, about = "Numerical experiments on circle diffeomorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Directory receiving report.json and any CSV series.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the `seed` key of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Named maps and functions.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
}

fn run(config: PathBuf, out: PathBuf, seed: Option<u64>) -> anyhow::Result<bool> {
    let mut cfg = Config::from_file(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let summary = run_config(&cfg, cfg.seed, &out).with_context(|| format!("running {}", config.display()))?;
    for (path, outcome) in &summary.reports {
        let r = &outcome.report;
        let state = if r.complete { "complete" } else { "INCOMPLETE" };
        println!("{} [{}] {}", path.display(), r.pipeline, state);
        if let Some(reason) = &r.incomplete_reason {
            println!("  {reason}");
        }
        for v in &r.verdicts {
            println!("  {}", v.line());
        }
    }
    for (dir, e) in &summary.failures {
        eprintln!("{dir}: {e}");
    }
    Ok(summary.all_complete())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog { action: CatalogAction::List } => {
            for (name, description) in catalog_entries() {
                println!("{name:<18} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seed } => match run(config, out, seed) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
    }
}
