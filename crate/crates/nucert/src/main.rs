use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nucert::config::{render_document, run, CliOverrides, CommandKind};
use nucert::Error;

/// Exact multiplicity certificates for ample divisor configurations.
#[derive(Parser)]
#[command(name = "nucert", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON problem file (for verify-certificate: the document).
    #[arg(long)]
    config: PathBuf,
    /// Solver convergence tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Iteration budget for the fixed-point solver.
    #[arg(long)]
    max_iter: Option<u64>,
    /// Largest denominator tried when rationalizing multiplicities.
    #[arg(long)]
    denominator_cap: Option<u64>,
    /// Largest filtration level tried by find-b.
    #[arg(long)]
    b_cap: Option<u64>,
    /// Slack fraction for find-b, e.g. "1/10".
    #[arg(long)]
    epsilon: Option<String>,
    /// Write the document here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for multiplicities and emit an exact certificate.
    #[command(visible_alias = "solve")]
    SolveMultiplicities(CommonArgs),
    /// Re-check every inequality of an emitted certificate document.
    VerifyCertificate(CommonArgs),
    /// Closed-form lower bound for the section growth ratio.
    NuBound(CommonArgs),
    /// Truncated section growth ratio from the exact counting oracle.
    OracleNu(CommonArgs),
    /// Check that the divisors meet properly (no shared components).
    ProperCheck(CommonArgs),
    /// Basis of sections adapted to the divisor order filtrations.
    AdaptedBasis(CommonArgs),
    /// Smallest filtration level certifying the slack inequality.
    FindB(CommonArgs),
}

impl Command {
    fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::SolveMultiplicities(a) => (CommandKind::Solve, a),
            Command::VerifyCertificate(a) => (CommandKind::VerifyCertificate, a),
            Command::NuBound(a) => (CommandKind::NuBound, a),
            Command::OracleNu(a) => (CommandKind::OracleNu, a),
            Command::ProperCheck(a) => (CommandKind::ProperCheck, a),
            Command::AdaptedBasis(a) => (CommandKind::AdaptedBasis, a),
            Command::FindB(a) => (CommandKind::FindB, a),
        }
    }
}

fn execute(kind: CommandKind, args: &CommonArgs) -> Result<i32, Error> {
    let input = fs::read_to_string(&args.config)
        .map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    let overrides = CliOverrides {
        tolerance: args.tolerance,
        max_iter: args.max_iter,
        denominator_cap: args.denominator_cap,
        b_cap: args.b_cap,
        epsilon: args.epsilon.clone(),
    };
    let outcome = run(kind, &input, &overrides)?;
    let text = render_document(&outcome.document)?;
    match &args.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::Io(format!("stdout: {e}")))?;
        }
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, &args) {
        Ok(code) => ExitCode::from(u8::try_from(code).unwrap_or(1)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
