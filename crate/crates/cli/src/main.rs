//! `finocr` — command-line surface for the document reconstruction and
//! evaluation toolkit.
//!
//! Subcommands: `merge` (cross-page consolidation), `dhr` (heading hierarchy
//! reconstruction via pseudo-TOC prompting), `eval` (metric reports),
//! `difficulty` (tabular difficulty scoring and curriculum stratification).
//!
//! Exit codes are a stable contract: 0 success, 2 input error, 3
//! external-service error, 4 internal failure.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::util::Failure;

#[derive(Parser)]
#[command(name = "finocr", version, about = "Document-level reconstruction and evaluation toolkit for long paginated documents")]
struct Cli {
    /// TOML config file (generation-service endpoint, auth, limits).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for corpus-level commands.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Seed for randomized extensions. Current pipelines are
    /// randomness-free; accepted for forward compatibility.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Consolidate cross-page tables and text runs in a document file.
    Merge(commands::merge::MergeArgs),
    /// Reconstruct the document-wide heading hierarchy.
    Dhr(commands::dhr::DhrArgs),
    /// Score predictions against gold and emit a metric report.
    Eval(commands::eval::EvalArgs),
    /// Extract table attributes, correlations and a curriculum plan.
    Difficulty(commands::difficulty::DifficultyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // Worker pool for corpus commands; per-document work stays
        // single-threaded.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let result = match &cli.command {
        Command::Merge(args) => commands::merge::run(args),
        Command::Dhr(args) => commands::dhr::run(args, cli.config.as_deref()),
        Command::Eval(args) => commands::eval::run(args),
        Command::Difficulty(args) => commands::difficulty::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Service(_) => 3,
            Failure::Internal(_) => 4,
        }
    }
}
