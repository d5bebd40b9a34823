use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinor_pairs::cli::{self, exit, CommandError, RunConfig};

#[derive(Parser)]
#[command(
    name = "spinor-pairs",
    version,
    about = "Spin-exchange pair production: gain scans, pair dynamics, exact oracle, quasi-spin statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a single key, e.g. --set q_mag=20 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Gain versus angle from the long axis
    GainScan(Common),
    /// Side-mode populations and on-shell pair correlation
    Dynamics(Common),
    /// Exact pump + pair-mode evolution
    Fock(Common),
    /// Quasi-spin statistics of the two-trap state
    SpinStats {
        #[command(flatten)]
        common: Common,
        /// Coefficient file with `m real imag` lines (default: binomial state)
        #[arg(long)]
        coeffs: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<RunConfig, CommandError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for assignment in &common.overrides {
        cfg.apply_override(assignment)?;
    }
    Ok(cfg)
}

fn run(command: Command) -> Result<(), CommandError> {
    let (cfg, csv) = match command {
        Command::GainScan(c) => {
            let cfg = load(&c)?;
            let csv = cli::cmd_gain_scan(&cfg)?;
            (cfg, csv)
        }
        Command::Dynamics(c) => {
            let cfg = load(&c)?;
            let csv = cli::cmd_dynamics(&cfg)?;
            (cfg, csv)
        }
        Command::Fock(c) => {
            let cfg = load(&c)?;
            let csv = cli::cmd_fock(&cfg)?;
            (cfg, csv)
        }
        Command::SpinStats { common, coeffs } => {
            let cfg = load(&common)?;
            let csv = cli::cmd_spin_stats(&cfg, coeffs.as_deref())?;
            (cfg, csv)
        }
    };
    match &cfg.output_path {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CommandError::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(parsed) => parsed,
        Err(err) => {
            let code = if err.use_stderr() { exit::CONFIG } else { 0 };
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(parsed.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code as u8)
        }
    }
}
