use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hetnet_cli::{run_with_manifest, Overrides, Profile};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (bad flags, bad HETNET_THREADS)
  3  scenario file unreadable or invalid
  4  output directory or file not writable
  5  numerical or model error during evaluation

manifest.json is written to the output directory in every case.";

#[derive(Parser)]
#[command(name = "hetnet", version, about = "Decoupled-access HetNet scenario runner", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSVs plus manifest.json.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Enable Monte Carlo with this many realizations per sweep point.
        #[arg(long)]
        mc_n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; falls back to HETNET_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Small-cell pathloss exponent 2.
        #[arg(long, conflicts_with = "nlos")]
        los: bool,
        /// Small-cell pathloss exponent 4.
        #[arg(long)]
        nlos: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, mc_n, seed, threads, los, nlos } => {
            let profile = if los {
                Some(Profile::Los)
            } else if nlos {
                Some(Profile::Nlos)
            } else {
                None
            };
            let ov = Overrides { mc_n, seed, threads, profile };
            let (code, manifest) = run_with_manifest(&scenario, &out, &ov);
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(e) = &manifest.error {
                eprintln!("error: {e}");
            }
            ExitCode::from(code as u8)
        }
    }
}
