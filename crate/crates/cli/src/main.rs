use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diskbeam::cli;

#[derive(Parser)]
#[command(name = "diskbeam", version, about = "Rotating disk-beam simulations with boundary feedback")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check parameters and feedback hypotheses of a scenario file.
    Validate { config: PathBuf },
    /// Simulate a scenario and write trace.csv, summary.json and envelope.csv.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every cell of a sweep file and write sweep.csv.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn fail(err: diskbeam::Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(cli::exit_code_for(&err) as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Validate { config } => match cli::validate_config(&config) {
            Ok(report) => {
                print!("{}", report.render());
                if report.hard_failure() {
                    ExitCode::from(2)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => fail(e),
        },
        Command::Run { config, out } => match cli::run(&config, &out) {
            Ok(summary) => {
                if let Some(f) = &summary.failure {
                    eprintln!("step failure at t = {}: {}", f.t, f.reason);
                }
                if let Some(env) = summary.envelope.as_ref().filter(|e| !e.feasible) {
                    eprintln!("envelope: {}", env.error.as_deref().unwrap_or("negative dominance margin"));
                }
                println!(
                    "{}: {} samples, status {:?}, output in {}",
                    config.display(),
                    summary.samples,
                    summary.status,
                    out.display()
                );
                ExitCode::from(summary.exit_code() as u8)
            }
            Err(e) => fail(e),
        },
        Command::Sweep { config, out, workers } => match cli::sweep(&config, &out, workers) {
            Ok(cells) => {
                let ok = cells.iter().filter(|c| c.status == "ok").count();
                println!("{} cells, {ok} ok, table in {}", cells.len(), out.join("sweep.csv").display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
