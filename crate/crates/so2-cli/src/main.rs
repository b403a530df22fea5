//! `so2` — exact second-order subdifferential calculus and tilt-stability
//! analysis for polyhedral and piecewise linear-quadratic problems.

use clap::{Parser, Subcommand, ValueEnum};
use so2::cli::{self, ChainMode, CmdOutcome};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "so2",
    about = "Exact second-order subdifferentials and tilt-stability verdicts",
    version
)]
struct Cli {
    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Include a derivation trace in the report.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    FullRank,
    Amenable,
    Partial,
}

#[derive(Subcommand)]
enum Command {
    /// Tilt-stability analysis of a ProblemSpec JSON file.
    Analyze {
        /// Path to the problem JSON.
        #[arg(long)]
        problem: PathBuf,
        /// Alias of --out kept for scripting symmetry.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Second-order value ∂²θ(z̄,v̄)(u) from a request JSON.
    Soc {
        #[arg(long)]
        input: PathBuf,
        /// Direction u as comma-separated rationals, overriding the request.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
    },
    /// Chain-rule computation for a composition θ∘h.
    Chain {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "full-rank")]
        mode: ModeArg,
        /// Direction u as comma-separated rationals, overriding the request.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        /// Only report the qualification conditions.
        #[arg(long)]
        check_qc_only: bool,
        /// Compute the amenable upper estimate even when the second-order
        /// qualification condition fails (the result is labeled unverified).
        #[arg(long)]
        override_qc2: bool,
    },
    /// Cross-check the face-pair formulas against the brute-force oracle.
    OracleCheck {
        /// Request JSON with theta/zbar/vbar and optional directions.
        #[arg(long, conflicts_with = "catalog")]
        input: Option<PathBuf>,
        /// θ JSON document (used with --at).
        #[arg(long, conflicts_with_all = ["input", "catalog"])]
        theta: Option<PathBuf>,
        /// Graph point as "z1,..;v1,..".
        #[arg(long, requires = "theta", allow_hyphen_values = true)]
        at: Option<String>,
        /// Direction grid JSON [[..],..].
        #[arg(long, requires = "theta")]
        directions: Option<PathBuf>,
        /// Run the embedded instance catalog instead.
        #[arg(long)]
        catalog: bool,
    },
    /// Reproduce an embedded worked example (currently: strict-inclusion).
    Repro {
        #[arg(default_value = "strict-inclusion")]
        name: String,
    },
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run(cli: &Cli) -> Result<(CmdOutcome, Option<PathBuf>), (String, i32)> {
    let map_err = |e: so2::Error| {
        let code = cli::exit_code_for_error(&e);
        (format!("error: {e}"), code)
    };
    match &cli.command {
        Command::Analyze { problem, report } => {
            let text = read(problem).map_err(|m| (m, 3))?;
            let out = cli::cmd_analyze(&text, cli.trace).map_err(map_err)?;
            Ok((out, report.clone()))
        }
        Command::Soc { input, direction } => {
            let text = read(input).map_err(|m| (m, 3))?;
            Ok((
                cli::cmd_soc(&text, direction.as_deref()).map_err(map_err)?,
                None,
            ))
        }
        Command::Chain {
            input,
            mode,
            direction,
            check_qc_only,
            override_qc2,
        } => {
            let text = read(input).map_err(|m| (m, 3))?;
            let mode = match mode {
                ModeArg::FullRank => ChainMode::FullRank,
                ModeArg::Amenable => ChainMode::Amenable,
                ModeArg::Partial => ChainMode::Partial,
            };
            Ok((
                cli::cmd_chain(
                    &text,
                    mode,
                    *check_qc_only,
                    *override_qc2,
                    direction.as_deref(),
                )
                .map_err(map_err)?,
                None,
            ))
        }
        Command::OracleCheck {
            input,
            theta,
            at,
            directions,
            catalog,
        } => {
            let input_text = match input {
                Some(p) => Some(read(p).map_err(|m| (m, 3))?),
                None => None,
            };
            let theta_text = match theta {
                Some(p) => Some(read(p).map_err(|m| (m, 3))?),
                None => None,
            };
            let dir_text = match directions {
                Some(p) => Some(read(p).map_err(|m| (m, 3))?),
                None => None,
            };
            Ok((
                cli::cmd_oracle_check(cli::OracleArgs {
                    input: input_text.as_deref(),
                    theta: theta_text.as_deref(),
                    at: at.as_deref(),
                    directions: dir_text.as_deref(),
                    catalog: *catalog,
                })
                .map_err(map_err)?,
                None,
            ))
        }
        Command::Repro { name } => Ok((cli::cmd_repro(name).map_err(map_err)?, None)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((outcome, extra_out)) => {
            let text =
                serde_json::to_string_pretty(&outcome.report).expect("reports are serializable");
            let dest = extra_out.or_else(|| cli.out.clone());
            match dest {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(5);
                    }
                    println!("{}", outcome.report.status);
                }
                None => println!("{text}"),
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err((msg, code)) => {
            eprintln!("{msg}");
            ExitCode::from(code as u8)
        }
    }
}
