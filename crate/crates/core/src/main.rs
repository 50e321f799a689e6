use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use guess::harness::{emit_report, simulate_exact, verify_bound, verify_decay, ExperimentConfig};
use guess::Error;

#[derive(Parser)]
#[command(name = "guess", version, about = "Symmetry-guided and zero-noise extrapolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config and write its report files.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Exit with status 2 if any report check fails.
        #[arg(long)]
        check: bool,
    },
    /// Closed-form decay of conserved Paulis under the master equation.
    VerifyDecay {
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
        #[arg(long, default_value_t = 5.0)]
        t: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
    /// Choi lower bounds against 4p for random two-qubit Clifford pairs.
    VerifyBound {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.003,0.01")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Config(anyhow::Error),
    Check,
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io { .. } => Failure::Config(e.into()),
            other => Failure::Other(other.into()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out, seed, threads, check } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("thread pool")
                    .map_err(Failure::Other)?;
            }
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = simulate_exact(&cfg)?.report(cfg.seed)?;
            for path in emit_report(&report, &out)? {
                println!("wrote {}", path.display());
            }
            let mut failed = false;
            for c in report.checks() {
                println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed |= !c.passed;
            }
            if check && failed {
                return Err(Failure::Check);
            }
        }
        Command::VerifyDecay { lambda, t, dt } => {
            let r = verify_decay(lambda, t, dt)?;
            println!("global decay max error {:.3e}", r.global_max_error);
            println!("log-ratio max error {:.3e}", r.log_ratio_max_error);
            if !r.passed {
                return Err(Failure::Check);
            }
        }
        Command::VerifyBound { pairs, p, seed } => {
            let r = verify_bound(pairs, &p, seed)?;
            println!("{} cases, {} violations, max lower/bound {:.4}", r.cases, r.violations, r.max_ratio);
            if !r.passed {
                return Err(Failure::Check);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Check) => ExitCode::from(2),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
