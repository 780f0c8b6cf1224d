use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bec_cli::output::{summary_csv, write_all};
use bec_cli::{run_sweep, Row, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bec-ground", version, about = "Ground states of two-component condensates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write results to a directory.
    Run {
        config: PathBuf,
        /// Output directory (default: `[output] dir`, else `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write φ1, φ2 on the grid for every run.
        #[arg(long)]
        dump_states: bool,
        /// Worker threads for sweeps (default: all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Run a configuration and print the summary table as CSV.
    Table {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn load(path: &Path) -> Result<RunConfig, ExitCode> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(2)
    })
}

fn report_failures(rows: &[Row]) -> ExitCode {
    let mut failed = false;
    for (k, row) in rows.iter().enumerate() {
        match &row.outcome {
            Err(e) => {
                eprintln!("run {k}: {}: {e}", e.code());
                failed = true;
            }
            Ok(s) if !s.report.converged => {
                eprintln!("run {k}: stopped by {}", s.report.termination.code());
                failed = true;
            }
            Ok(_) => {}
        }
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            dump_states,
            threads,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let dir = out
                .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("results"));
            let rows = run_sweep(&cfg, threads);
            if let Err(e) = write_all(&dir, &cfg.columns(), &rows, dump_states) {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            report_failures(&rows)
        }
        Command::Table { config, threads } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let rows = run_sweep(&cfg, threads);
            print!("{}", summary_csv(&cfg.columns(), &rows));
            report_failures(&rows)
        }
    }
}
