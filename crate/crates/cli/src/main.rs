//! `ludeme`: batch tools over the ludeme engine.
//!
//! Exit codes: 0 success, 1 domain error (bad rules, config or input), 2
//! usage error, 3 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ludeme::agents::AgentConfig;

#[derive(Parser, Debug)]
#[command(name = "ludeme", version = commands::VERSION, about = "Ludeme game tools", propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Master seed for randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; output does not depend on it. Defaults to the core count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a .lud file; report holes and issues.
    Check {
        file: PathBuf,
    },
    /// Play a seat-swapped match between two agents and tabulate outcomes.
    Play {
        file: PathBuf,
        /// First agent, `kind[:budget[:c]]` (random, flatmc:200, uct:1000).
        #[arg(long, default_value = "uct:1000")]
        p1: AgentConfig,
        /// Second agent.
        #[arg(long, default_value = "random")]
        p2: AgentConfig,
        #[arg(long, default_value_t = 100)]
        games: usize,
        /// Ply cap per game; longer games count as timeouts.
        #[arg(long, default_value_t = 500)]
        move_cap: u32,
        /// Keep the first agent as P1 in every game.
        #[arg(long)]
        no_swap: bool,
        /// Write one CSV row per game here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an analysis job file and print its metrics report.
    Analyze {
        job: PathBuf,
        /// Write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one CSV row per main-batch game here.
        #[arg(long)]
        trials_csv: Option<PathBuf>,
    },
    /// Rank the completions of a partial game described by a config file.
    Reconstruct {
        config: PathBuf,
        /// Directory for the ranked report and one .lud per candidate.
        #[arg(long, default_value = "reconstruction")]
        out: PathBuf,
    },
    /// Genotype distance matrix over the .lud files of a directory.
    Dist {
        dir: PathBuf,
        /// Also write the matrix as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare integer arguments by value instead of abstracting them.
        #[arg(long)]
        raw_integers: bool,
    },
    /// Neighbour-joining tree from a distance matrix CSV.
    Phylo {
        matrix: PathBuf,
        /// Also write the Newick tree here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify each .lud file of a directory: name, class, features.
    Classify {
        dir: PathBuf,
    },
    /// Write the bundled reference games into a directory.
    Corpus {
        dir: PathBuf,
    },
    /// Serve the HTTP and WebSocket session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

/// How a command failed.
#[derive(Debug)]
pub enum Failure {
    /// Bad rules, config or input files.
    Domain(String),
    Internal(String),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("internal error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = std::panic::catch_unwind(|| commands::run(&cli));
    match result {
        Ok(Ok(out)) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Ok(Err(Failure::Domain(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
