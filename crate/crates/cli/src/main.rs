mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use capot::{Error, Mode};
use clap::{Args, Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit status:
  0  every check in the command passed
  1  a check failed (plan not optimal, certificate rejected, ...)
  2  usage error (bad flags, grid size not divisible, ...)
  3  file could not be read or written
  4  malformed input file (syntax, shape, signs, unbalanced marginals)
  5  solver error (exact arithmetic limit, oracle size limit, ...)
  6  problem is infeasible under its capacities";

/// Capacity-constrained optimal transport: solve, certify and analyze.
#[derive(Parser, Debug)]
#[command(name = "capot", version, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a problem file; writes plan.csv, certificate.json and result.json.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Check a plan and a dual certificate against a problem.
    VerifyCertificate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Plan CSV (`i,j,mass`).
        #[arg(long)]
        plan: PathBuf,
        /// Certificate JSON (`u`, `v`, `w`).
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Classify the cells of a plan and write a support heatmap.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Plan to analyze; the problem is solved when omitted.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Reproduce a reference example and check it against its expected values.
    Example {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: ExampleArgs,
        /// Example number, same as --example.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: Option<u8>,
    },
    /// Cross-check the network simplex against the dense oracle on random instances.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: u64,
        /// Largest number of rows or columns.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=8))]
        max_size: u64,
    },
    /// Fraction of mass in fractional cells across grid sizes.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: ExampleArgs,
        /// Comma-separated, strictly increasing grid sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        sizes: Vec<usize>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Tolerance for checks: `p/q` or decimal. Defaults to 0 in exact mode
    /// and to a size-relative 1e-9 in float mode.
    #[arg(long)]
    tol: Option<String>,
    /// Directory for artifacts; created if missing.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    example: Option<u8>,
    #[arg(long, default_value_t = 8)]
    grid_n: usize,
    /// Capacity density of example 3 (`p/q` or decimal, at least 1).
    #[arg(long)]
    hbar: Option<String>,
}

/// What a command concluded, as opposed to failing to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Infeasible,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InfeasiblePlan(_) | Error::InfeasibleCertificate { .. } => 1,
        Error::Divisibility { .. } | Error::InvalidArgument(_) => 2,
        Error::Io(_) => 3,
        Error::Parse(_) | Error::Dimension(_) | Error::Domain(_) | Error::Unbalanced { .. } => 4,
        Error::Resource { .. } | Error::SolverFailure(_) | Error::InstanceTooLarge { .. } => 5,
        Error::Infeasible { .. } => 6,
    }
}

fn run(cli: Cli) -> capot::Result<Verdict> {
    match cli.command {
        Command::Solve { common, input } => commands::solve(&common, &input),
        Command::VerifyCertificate { common, input, plan, certificate } => {
            commands::verify_certificate(&common, &input, &plan, &certificate)
        }
        Command::Analyze { common, input, plan } => commands::analyze(&common, &input, plan.as_deref()),
        Command::Example { common, instance, which } => {
            let which = match (which, instance.example) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::InvalidArgument(format!("example given as both {a} and {b}")))
                }
                (Some(a), _) | (None, Some(a)) => a,
                (None, None) => return Err(Error::InvalidArgument("choose an example: 1, 2 or 3".into())),
            };
            commands::example(&common, which, &instance)
        }
        Command::OracleCompare { common, seed, count, max_size } => {
            commands::oracle_compare(&common, seed, count, max_size as usize)
        }
        Command::Convergence { common, instance, sizes } => {
            commands::convergence(&common, instance.example.unwrap_or(2), &instance, &sizes)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(Verdict::Infeasible) => ExitCode::from(6),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
