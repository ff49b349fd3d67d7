use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kinpart::cli::{self, RunConfig, DEFAULT_SAMPLES, DEFAULT_SIGMA, FULL_SAMPLES};
use kinpart::{MassMode, ToleranceConfig};

/// Kinetic energy partitions of particle systems.
///
/// The worker thread count for `simulate` is read from KINPART_THREADS.
#[derive(Debug, Parser)]
#[command(name = "kinpart", version)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Partition one system read from a JSON file and print a JSON object.
    Partition {
        #[arg(long)]
        input: PathBuf,
    },
    /// Monte Carlo means over a range of particle counts, written as CSV.
    Simulate {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = DEFAULT_SAMPLES, conflicts_with = "full")]
        samples: u64,
        /// Use 10^6 samples per particle count.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value = "equal")]
        masses: MassMode,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = ToleranceConfig::default().gap_tol)]
        gap_tol: f64,
        #[arg(long, default_value_t = ToleranceConfig::default().zero_tol)]
        zero_tol: f64,
    },
    /// Check a simulation CSV against the expected means. Exits 1 on failure.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGMA)]
        sigma: f64,
    },
    /// Compare fast paths against brute-force references on small systems.
    OracleCheck {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(args: Args) -> kinpart::Result<bool> {
    match args.cmd {
        Cmd::Partition { input } => {
            let v = cli::cmd_partition(&input)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(true)
        }
        Cmd::Simulate {
            d,
            n_min,
            n_max,
            samples,
            full,
            masses,
            seed,
            out,
            gap_tol,
            zero_tol,
        } => {
            let samples = if full { FULL_SAMPLES } else { samples };
            let mut cfg = RunConfig::simulate(d, n_min, n_max, samples, masses, seed);
            cfg.gap_tol = gap_tol;
            cfg.zero_tol = zero_tol;
            cfg.out = Some(out.clone());
            let rows = cli::cmd_simulate(&cfg)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(true)
        }
        Cmd::Verify { input, sigma } => {
            let (text, pass) = cli::cmd_verify(&input, sigma)?;
            print!("{text}");
            Ok(pass)
        }
        Cmd::OracleCheck { d, n, samples, seed } => {
            let (text, pass) = cli::cmd_oracle_check(d, n, samples, seed)?;
            print!("{text}");
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
