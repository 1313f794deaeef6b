use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dyadic_field::runner::{self, Command, Format, RunOptions};
use dyadic_field::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "dyadic-field", version, about = "Maximal-inequality and limit-theorem experiments on random fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file, TOML or JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (speed only).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "both")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Telescoping decomposition and pathwise bound on sampled fields.
    Decompose(RunArgs),
    /// Rosenthal-type ledger: Monte Carlo left side against the weighted right side.
    Rosenthal(RunArgs),
    /// Tail-bound preconditions and Monte Carlo tail.
    Tailbound(RunArgs),
    /// Exact minimal constant of the H_2q condition.
    H2q(RunArgs),
    /// Dyadic complete-convergence series.
    Series(RunArgs),
    /// Single-path strong-law trace.
    Slln(RunArgs),
    /// Weak-law probabilities with truncation centering.
    Wlln(RunArgs),
    /// L_p trace of normalized maxima.
    Lp(RunArgs),
    /// de Bruijn conjugate residuals.
    Varying(RunArgs),
    /// Stochastic domination and uniform integrability.
    Dominate(RunArgs),
    /// Equivalent moment series, classified.
    MomentSeries(RunArgs),
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Verify the checksums of a previous run.
    Manifest {
        /// Output directory or manifest file.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path, command: Option<Command>) -> dyadic_field::Result<runner::Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
    runner::parse_scenario_str(&text, is_json, command)
}

fn fail(e: &Error) -> ExitCode {
    let (kind, code) = match e {
        Error::Config(_) => ("config", 2),
        _ => ("runtime", 3),
    };
    let violations = match e {
        Error::Config(v) => v.clone(),
        other => vec![other.to_string()],
    };
    eprintln!("{}", json!({ "error": { "kind": kind, "message": e.to_string(), "violations": violations } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.cmd {
        Cmd::Validate { config } => {
            return match load(&config, None) {
                Ok(sc) => {
                    println!("{}", serde_json::to_string_pretty(&sc).expect("scenario serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            };
        }
        Cmd::Manifest { out } => {
            return match runner::inspect_manifest(&out) {
                Ok(c) => {
                    println!("{}", serde_json::to_string_pretty(&c).expect("manifest serializes"));
                    if c.verified {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(3)
                    }
                }
                Err(e) => fail(&e),
            };
        }
        Cmd::Decompose(a) => (Command::Decompose, a),
        Cmd::Rosenthal(a) => (Command::Rosenthal, a),
        Cmd::Tailbound(a) => (Command::Tailbound, a),
        Cmd::H2q(a) => (Command::H2q, a),
        Cmd::Series(a) => (Command::Series, a),
        Cmd::Slln(a) => (Command::Slln, a),
        Cmd::Wlln(a) => (Command::Wlln, a),
        Cmd::Lp(a) => (Command::Lp, a),
        Cmd::Varying(a) => (Command::Varying, a),
        Cmd::Dominate(a) => (Command::Dominate, a),
        Cmd::MomentSeries(a) => (Command::MomentSeries, a),
    };
    let sc = match load(&args.config, Some(command)) {
        Ok(sc) => sc,
        Err(e) => return fail(&e),
    };
    let opts = RunOptions {
        seed: args.seed,
        out: args.out,
        threads: args.threads,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        },
    };
    match runner::run(&sc, &opts) {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m).expect("manifest serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
