use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use psido_cli::runner::{run_path, RunOptions, WORKERS_ENV};
use psido_cli::selftest::{self, Check};
use psido_core::symbols::gallery;

#[derive(Parser)]
#[command(name = "psido", version, about = "Pseudodifferential operators on compact abelian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (symbol, filter, window) experiment in a config.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Exact-algebra checks on Z_8.
    Selftest {
        /// Perturb one check to confirm it can fail.
        #[arg(long, value_name = "CHECK")]
        inject_fault: Option<Check>,
        #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = selftest::DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Show the symbol gallery.
    Gallery {
        /// List entry names with their default parameters.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed, workers } => {
            match run_path(&config, &RunOptions { out_dir: out, seed, workers }) {
                Ok(summary) => {
                    for o in &summary.outcomes {
                        let extra = o.detail.as_deref().map(|d| format!("  ({d})")).unwrap_or_default();
                        println!("{:<5} {} / {} / M={}{extra}", o.verdict, o.symbol, o.filter, o.window);
                    }
                    println!("results in {}", summary.out_dir.display());
                    summary.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::Selftest { inject_fault, seed, trials } => {
            let report = selftest::run(seed, trials, inject_fault);
            for line in report.lines() {
                println!("{line}");
            }
            report.exit_code()
        }
        Command::Gallery { list } => {
            let mut out = std::io::stdout().lock();
            for (name, spec) in gallery::gallery(1) {
                let line = if list {
                    format!("{name:<24} {}", serde_json::to_string(&spec).unwrap_or_default())
                } else {
                    name.to_string()
                };
                if writeln!(out, "{line}").is_err() {
                    break;
                }
            }
            0
        }
    };
    ExitCode::from(code as u8)
}
