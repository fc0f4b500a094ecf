mod commands;
mod error;
mod family;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::error::CliError;
use crate::output::Format;

/// Reliability matrices and exponent checks for multiple hypothesis testing
/// with logarithmically asymptotically optimal tests.
#[derive(Debug, Parser)]
#[command(name = "lao", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Family file (TOML).
    #[arg(long, global = true)]
    family: Option<PathBuf>,
    /// Logarithm base for every exponent (overrides the family file).
    #[arg(long, global = true)]
    base: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for simulations (default 1).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the compatibility conditions of a diagonal specification.
    Compat {
        /// Values E1|1..E(M-1)|(M-1), inline or a file path.
        #[arg(long)]
        spec: String,
    },
    /// Reliability matrix of the ball-partition test.
    Reliability {
        #[arg(long)]
        spec: String,
        /// Fail when a compatibility condition is violated.
        #[arg(long)]
        strict: bool,
    },
    /// Classify samples (one per line) with the ball-partition test.
    Classify {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        sample: PathBuf,
        /// Use the rule with a reject outcome (spec has M values).
        #[arg(long)]
        reject: bool,
    },
    /// Exponent of wrongly identifying one or two hypotheses.
    Identify {
        /// Hypothesis to identify (1-based).
        #[arg(long)]
        r: usize,
        /// Second hypothesis for pair identification.
        #[arg(long)]
        r2: Option<usize>,
        /// Required exponent of missing the hypothesis.
        #[arg(long)]
        e: f64,
        /// Evaluate a pair even when its identification conditions fail.
        #[arg(long)]
        force: bool,
    },
    /// Reliability of K independent objects tested jointly.
    Compound {
        #[arg(long, default_value_t = 2)]
        objects: usize,
        /// One row, or one row per object, separated by ';'.
        #[arg(long)]
        spec: String,
    },
    /// Reliability of a pair of dependent objects.
    Dependent {
        /// Radii for the first object (M1-1 values).
        #[arg(long = "marginal-spec")]
        marginal_spec: String,
        /// Radii for the second object, one row of M2-1 values per first
        /// hypothesis, separated by ';'.
        #[arg(long = "conditional-spec")]
        conditional_spec: String,
    },
    /// Reliability matrix of the test with a reject outcome.
    Reject {
        /// Values E1..EM.
        #[arg(long)]
        spec: String,
    },
    /// Exact error probabilities over a grid of sample sizes, with exponent
    /// fits and the polynomial sandwich.
    Enumerate {
        #[arg(long)]
        spec: String,
        /// Sample sizes as a:b:step or a comma list.
        #[arg(long = "n-grid")]
        n_grid: String,
        #[arg(long)]
        reject: bool,
    },
    /// Monte Carlo error frequencies, compared with exact values when the
    /// enumeration guard allows.
    Simulate {
        #[arg(long)]
        spec: String,
        /// Sample size, or a:b:step / comma list.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        reject: bool,
    },
    /// Compound exponents along one or two specification axes.
    Sweep {
        #[arg(long, default_value_t = 2)]
        objects: usize,
        #[arg(long)]
        spec: String,
        /// OBJECT:HYP=start:stop:step, 1-based; repeat for a second axis.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        /// Entry to track as accepted|true tuples, e.g. 1,3|2,3.
        #[arg(long = "probe")]
        probes: Vec<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .family
        .ok_or_else(|| CliError::Validation("--family is required".into()))?;
    let family = family::load_family(&path, cli.base)?;
    let ctx = Ctx {
        family,
        family_path: path.display().to_string(),
        seed: cli.seed,
    };
    let report = match &cli.command {
        Command::Compat { spec } => commands::compat(&ctx, spec)?,
        Command::Reliability { spec, strict } => commands::reliability(&ctx, spec, *strict)?,
        Command::Classify { spec, sample, reject } => commands::classify_cmd(&ctx, spec, sample, *reject)?,
        Command::Identify { r, r2, e, force } => commands::identify(&ctx, *r, *r2, *e, *force)?,
        Command::Compound { objects, spec } => commands::compound(&ctx, *objects, spec)?,
        Command::Dependent {
            marginal_spec,
            conditional_spec,
        } => commands::dependent(&ctx, marginal_spec, conditional_spec)?,
        Command::Reject { spec } => commands::reject(&ctx, spec)?,
        Command::Enumerate { spec, n_grid, reject } => commands::enumerate(&ctx, spec, n_grid, *reject)?,
        Command::Simulate {
            spec,
            n,
            trials,
            reject,
        } => commands::simulate(&ctx, spec, n, *trials, *reject)?,
        Command::Sweep {
            objects,
            spec,
            axes,
            probes,
        } => commands::sweep(&ctx, *objects, spec, axes, probes)?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    report.write(cli.format, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
