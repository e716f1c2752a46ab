//! Batch experiment runner for the multiplier calculus: every engine
//! capability behind a subcommand, JSON configs in, CSV/JSON out.
//! Exit codes: 0 all checks pass, 1 a check failed, 2 invalid config.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Overrides, EXIT_CHECK_FAILURE, EXIT_CONFIG_ERROR};

#[derive(Parser)]
#[command(
    name = "multcalc",
    about = "Coefficient-multiplier calculus on product domains: apply, verify and measure",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON experiment configuration
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// output path (overrides the config's "out")
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// per-circle quadrature node override
    #[arg(long, value_name = "N")]
    nodes: Option<usize>,
    /// truncation box override, e.g. 12,12
    #[arg(long, value_name = "D1,D2,...", value_delimiter = ',')]
    r#box: Option<Vec<usize>>,
    /// seed for randomized checks
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// tolerance override for pass/fail rows
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a multiplier to a series on a point grid and compare with the
    /// coefficientwise oracle
    Apply(CommonArgs),
    /// Run the full invariant battery and emit a pass/fail report
    Verify(CommonArgs),
    /// Moment sequence of an analytic functional over a box
    Moments(CommonArgs),
    /// Sample the Cauchy transform of a functional; optionally check the
    /// moment roundtrip
    Transform(CommonArgs),
    /// Weighted-derivative seminorm of a germ or functional
    Seminorm(CommonArgs),
    /// Compose two multipliers and check the operator identity
    Compose(CommonArgs),
    /// Quadrature convergence study over doubling node counts
    Bench(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Apply(c)
            | Command::Verify(c)
            | Command::Moments(c)
            | Command::Transform(c)
            | Command::Seminorm(c)
            | Command::Compose(c)
            | Command::Bench(c) => c,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Apply(_) => "apply",
            Command::Verify(_) => "verify",
            Command::Moments(_) => "moments",
            Command::Transform(_) => "transform",
            Command::Seminorm(_) => "seminorm",
            Command::Compose(_) => "compose",
            Command::Bench(_) => "bench",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common().clone();
    let overrides = Overrides {
        nodes: common.nodes,
        bounds: common.r#box.clone(),
        seed: common.seed,
        tol: common.tol,
        out: common.out.clone(),
    };
    let config = match ExperimentConfig::load(&common.config, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let outcome = match &cli.command {
        Command::Apply(_) => commands::apply::run(&config),
        Command::Verify(_) => commands::verify::run(&config),
        Command::Moments(_) => commands::moments::run(&config),
        Command::Transform(_) => commands::transform::run(&config),
        Command::Seminorm(_) => commands::seminorm::run(&config),
        Command::Compose(_) => commands::compose::run(&config),
        Command::Bench(_) => commands::bench::run(&config),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: some checks failed", cli.command.name());
            ExitCode::from(EXIT_CHECK_FAILURE)
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}
