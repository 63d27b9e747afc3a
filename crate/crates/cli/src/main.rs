//! `porebound`: solve, bound and verify degenerate Forchheimer gas flows
//! from a TOML run configuration.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver failure,
//! 3 verification failure.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::{CliError, GasArgs, Run};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "porebound", version, about = "A-priori bounds and simulation for Forchheimer gas flow in porous media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Run configuration (TOML).
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and write trace, mass balance and final field.
    Solve(ConfigArgs),
    /// Evaluate the weighted and L-infinity bounds.
    Bounds(ConfigArgs),
    /// Solve, bound, and check the solution against the bounds.
    Verify(ConfigArgs),
    /// Run the embedding-inequality suite on the harness family.
    CheckInequalities {
        #[command(flatten)]
        args: ConfigArgs,
        /// Multiply every embedding constant by this factor.
        #[arg(long)]
        sabotage: Option<f64>,
    },
    /// Fit the embedding constants on the harness family.
    Calibrate(ConfigArgs),
    /// Ideal-gas closed forms against the generic exponent pipeline.
    GasExample {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Defaults to 0.8 for n = 3 and 2/3 for n = 2.
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 40.0)]
        alpha: f64,
        #[arg(long, default_value_t = 40.0)]
        alpha0: f64,
        #[arg(long, default_value_t = 1.03)]
        kappa_tilde: f64,
        /// Directory for gas.csv and gas.json.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn open(args: &ConfigArgs) -> Result<Run, CliError> {
    let loaded = config::load_config(&args.config)?;
    Run::open(loaded, args.output.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => commands::cmd_solve(&open(&a)?),
        Command::Bounds(a) => commands::cmd_bounds(&open(&a)?),
        Command::Verify(a) => commands::cmd_verify(&open(&a)?),
        Command::CheckInequalities { args, sabotage } => commands::cmd_check_inequalities(&open(&args)?, sabotage),
        Command::Calibrate(a) => commands::cmd_calibrate(&open(&a)?),
        Command::GasExample { n, r1, r, alpha, alpha0, kappa_tilde, output } => {
            commands::cmd_gas_example(&GasArgs { n, r1, r, alpha, alpha0, kappa_tilde, output })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("porebound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
