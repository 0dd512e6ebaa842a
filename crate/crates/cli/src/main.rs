use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod report;

use report::RunConfig;

/// Verification runner for parabolic Chern–Weil computations.
#[derive(Debug, Parser)]
#[command(name = "parachern", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input file; `ops` accepts it twice for a pair of models.
    #[arg(long, global = true)]
    input: Vec<PathBuf>,
    /// Directory for the JSON report and CSV series. Without it the report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance of the main check; each command has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample budget for stochastic checks.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 24_301)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Parabolic degree, slope and filtration checks of one model.
    Pardeg,
    /// Dual, determinant, tensor product and direct sum with identity checks.
    Ops,
    /// Admissibility of a metric descended from the branched cover.
    Admissible,
    /// Chern and Segre forms of a curvature matrix, with positivity tests.
    Chern,
    /// Fiber integral against its closed form, quadrature and Monte Carlo.
    Pushforward,
    /// Monge–Ampère solve on the torus and the positivity of the result.
    Masolve,
    /// Every command on the built-in fixtures.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Pardeg => "pardeg",
            Self::Ops => "ops",
            Self::Admissible => "admissible",
            Self::Chern => "chern",
            Self::Pushforward => "pushforward",
            Self::Masolve => "masolve",
            Self::All => "all",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PARACHERN_LOG", "warn")).init();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let config = RunConfig {
        command: cli.command.name().to_string(),
        inputs: cli.input,
        out: cli.out,
        tol: cli.tol,
        samples: cli.samples,
        seed: cli.seed,
    };
    let code = match commands::run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("parachern {}: {e}", config.command);
            e.exit_code()
        }
    };
    ExitCode::from(code)
}
