//! Thin command-line front end over [`latgas::pipeline`]. All logic lives
//! in the library; this binary only parses arguments and maps errors to
//! exit codes (0 success, 2 bad configuration or usage, 3 precondition
//! failure, 4 failed property or integrity check).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use latgas::config::JobConfig;
use latgas::pipeline::{self, Overrides};

/// Lattice-gas Monte Carlo and scattering analysis.
///
/// Every flag can also be set through the environment with the LATGAS_
/// prefix (LATGAS_CONFIG, LATGAS_OUT, LATGAS_SEED, LATGAS_THREADS).
#[derive(Parser)]
#[command(name = "latgas", version, about)]
struct Cli {
    /// Job description file (TOML).
    #[arg(long, global = true, env = "LATGAS_CONFIG", default_value = "job.toml")]
    config: PathBuf,

    /// Output directory; overrides the job file.
    #[arg(long, global = true, env = "LATGAS_OUT")]
    out: Option<PathBuf>,

    /// RNG seed; overrides the job file.
    #[arg(long, global = true, env = "LATGAS_SEED")]
    seed: Option<u64>,

    /// Parallel chains to run (0 = take the job file's setting).
    #[arg(long, global = true, env = "LATGAS_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the model and evaluate the regime conditions.
    Check,
    /// Run the Monte Carlo chain(s) and record the sample stream.
    Simulate,
    /// Estimate correlations, convert to occupation form, fit decay laws.
    Analyze,
    /// Build the diffraction spectrum and run the property checks.
    Diffract,
    /// Verify the artifact manifest and write a readable report.
    Report,
    /// Run check, simulate, analyze, diffract, and report in order.
    All,
}

fn execute(cli: &Cli) -> latgas::Result<()> {
    let job = JobConfig::from_path(&cli.config)?;
    let ov = Overrides {
        out_dir: cli.out.clone(),
        seed: cli.seed,
        chains: if cli.threads == 0 {
            None
        } else {
            Some(cli.threads)
        },
    };
    match cli.command {
        Command::Check => {
            let path = pipeline::cmd_check(&job, &ov)?;
            println!("conditions written to {}", path.display());
        }
        Command::Simulate => {
            let dir = pipeline::cmd_simulate(&job, &ov)?;
            println!("samples and statistics written to {}", dir.display());
        }
        Command::Analyze => {
            let dir = pipeline::cmd_analyze(&job, &ov)?;
            println!("correlation tables and fits written to {}", dir.display());
        }
        Command::Diffract => {
            let dir = pipeline::cmd_diffract(&job, &ov)?;
            println!("spectrum and property checks written to {}", dir.display());
        }
        Command::Report => {
            let path = pipeline::cmd_report(&job, &ov)?;
            println!("report written to {}", path.display());
        }
        Command::All => {
            let path = pipeline::cmd_all(&job, &ov)?;
            println!("pipeline complete; report at {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
