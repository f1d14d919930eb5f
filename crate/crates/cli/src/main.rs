use std::path::{Path, PathBuf};
use std::process::ExitCode;

use betlab_cli::commands::{self, AlphaCurveArgs, CliError};
use clap::{Parser, Subcommand};

/// Expected-utility analysis of repeated bets.
///
/// Exit codes: 0 success, 1 unreadable input, 2 model or domain error,
/// 3 failed verification.
#[derive(Parser)]
#[command(name = "betlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal contingent plan by backward induction.
    Solve {
        spec: PathBuf,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score every committed split of n bets between the two decisions.
    Simultaneous {
        spec: PathBuf,
        /// Add the normal-approximation column.
        #[arg(long)]
        with_approx: bool,
        /// Calibration alpha for the additive column.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate alpha(x) and classify its trend.
    AlphaCurve {
        /// log, linear[:slope], power:gamma, exponential:lambda or normalized_log:n
        #[arg(long)]
        utility: String,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long)]
        x_max: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Defaults to b + x_max.
        #[arg(long)]
        domain_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Horizon from which all-B is preferred to all-A.
    Threshold {
        spec: PathBuf,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare backward induction with exhaustive policy enumeration.
    OracleCheck { spec: PathBuf },
    /// Print a spec in canonical form.
    Fmt { spec: PathBuf },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { spec, json, out } => {
            emit(&commands::cmd_solve_sequential(&spec, json)?, out.as_deref())
        }
        Command::Simultaneous {
            spec,
            with_approx,
            alpha,
            out,
        } => emit(
            &commands::cmd_analyze_simultaneous(&spec, with_approx, alpha)?,
            out.as_deref(),
        ),
        Command::AlphaCurve {
            utility,
            a,
            c,
            b,
            x_min,
            x_max,
            points,
            domain_max,
            out,
        } => {
            let args = AlphaCurveArgs {
                utility: &utility,
                a,
                c,
                b,
                x_min,
                x_max,
                points,
                domain_max,
            };
            emit(&commands::cmd_alpha_curve(args)?, out.as_deref())
        }
        Command::Threshold { spec, n_max, out } => {
            emit(&commands::cmd_find_threshold(&spec, n_max)?, out.as_deref())
        }
        Command::OracleCheck { spec } => {
            let checked = commands::cmd_oracle_check(&spec)?;
            print!("{}", checked.report);
            if checked.passed {
                Ok(())
            } else {
                Err(CliError::Verification(
                    "backward induction disagrees with enumeration".into(),
                ))
            }
        }
        Command::Fmt { spec } => emit(&commands::cmd_fmt(&spec)?, None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
