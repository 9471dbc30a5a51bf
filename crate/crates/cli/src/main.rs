use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use insitu_cli::artifact::Format;
use insitu_cli::commands::{execute, Command, Invocation};

/// In-situ learning of entangling-gate control pulses.
#[derive(Debug, Parser)]
#[command(name = "insitu", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Experiment spec file
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Artifact CSV to plot
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding the spec's
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trials and samples
    #[arg(long, global = true, env = "INSITU_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Leave the timestamp out of the metadata
    #[arg(long, global = true)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let timestamp = (!args.no_timestamp).then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let inv = Invocation {
        command: args.command,
        spec: args.spec,
        input: args.input,
        out: args.out,
        seed: args.seed,
        workers: args.workers,
        format: args.format,
        timestamp,
    };
    match execute(&inv) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            match report.failure {
                Some(why) => {
                    eprintln!("run failed: {why}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
