use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gaussprod::classify::HeuristicOptions;
use gaussprod::cli::{self, CmdOutput, Grid, MatrixSource, EXIT_USAGE};
use gaussprod::moments::ExponentVector;
use gaussprod::{Rational, Result};

/// Exact checks of Gaussian product inequalities and sign conditions on
/// covariance matrices.
#[derive(Parser)]
#[command(name = "gaussprod", version)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Matrix file `{"d": ..., "entries": [[...]]}` with rational strings.
    file: Option<PathBuf>,

    /// Embedded fixture name (see `fixtures list`).
    #[arg(long, conflicts_with = "file")]
    fixture: Option<String>,

    /// Diagonal perturbation of `paper_5x5`, as `P/Q`.
    #[arg(long, default_value = "1/10")]
    epsilon: Rational,
}

impl Input {
    fn source(&self) -> Result<MatrixSource> {
        match (&self.fixture, &self.file) {
            (Some(name), _) => Ok(MatrixSource::Fixture {
                name: name.clone(),
                epsilon: self.epsilon.clone(),
            }),
            (None, Some(path)) => Ok(MatrixSource::File(path.clone())),
            (None, None) => Err(gaussprod::Error::InvalidArgument(
                "give a matrix file or --fixture NAME".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Report conditions I to IV with witnesses and certificates.
    Classify {
        #[command(flatten)]
        input: Input,
        /// Seed for the float factorization search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration budget for the float factorization search.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Compare the joint even moment with the product of marginals.
    Gpi {
        #[command(flatten)]
        input: Input,
        /// Half-exponents, e.g. `1,2,0`.
        #[arg(short = 'n', value_parser = ExponentVector::parse_list)]
        n: ExponentVector,
        /// Compare against the product of the first K and the remaining coordinates.
        #[arg(long)]
        split: Option<usize>,
    },
    /// Exact joint even moment, optionally with a Monte Carlo estimate.
    Moment {
        #[command(flatten)]
        input: Input,
        #[arg(short = 'n', value_parser = ExponentVector::parse_list)]
        n: ExponentVector,
        /// Monte Carlo draws.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Property sweeps; exit 1 if any violation is found.
    #[command(subcommand)]
    Sweeps(Sweep),
    /// Embedded fixtures.
    #[command(subcommand)]
    Fixtures(Fixtures),
}

#[derive(Subcommand)]
enum Sweep {
    /// Factorial inequality on every allocation, exhaustively.
    Ineq7 {
        #[arg(short = 'd', default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        nmax: u32,
    },
    /// Reciprocal-power inequality on random simplex points.
    #[command(name = "lemma-a1")]
    LemmaA1 {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Shape of the gamma ratio along a grid.
    Gratio {
        #[arg(long, default_value = "0:10:0.1")]
        grid: Grid,
        /// Number of random column specs.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expansion chain for random nonnegative mixing matrices.
    Chain {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest dimension.
        #[arg(short = 'd', default_value_t = 4)]
        d: usize,
        /// Largest total half-degree.
        #[arg(long, default_value_t = 8)]
        nmax: u32,
    },
}

#[derive(Subcommand)]
enum Fixtures {
    List {
        #[arg(long, default_value = "1/10")]
        epsilon: Rational,
    },
    /// Print one fixture as a matrix file.
    Show {
        name: String,
        #[arg(long, default_value = "1/10")]
        epsilon: Rational,
    },
}

fn run(cli: Cli) -> Result<CmdOutput> {
    let json = cli.json;
    match cli.command {
        Command::Classify { input, seed, budget } => {
            cli::cmd_classify(&input.source()?, &HeuristicOptions { budget, seed }, json)
        }
        Command::Gpi { input, n, split } => cli::cmd_gpi(&input.source()?, &n, split, json),
        Command::Moment { input, n, samples, seed } => {
            cli::cmd_moment(&input.source()?, &n, samples, seed, json)
        }
        Command::Sweeps(s) => match s {
            Sweep::Ineq7 { d, nmax } => cli::cmd_sweep_ineq7(d, nmax, json),
            Sweep::LemmaA1 { samples, seed } => cli::cmd_sweep_lemma_a1(samples, seed, json),
            Sweep::Gratio { grid, samples, seed } => cli::cmd_sweep_gratio(&grid, samples, seed, json),
            Sweep::Chain { samples, seed, d, nmax } => cli::cmd_sweep_chain(samples, seed, d, nmax, json),
        },
        Command::Fixtures(f) => match f {
            Fixtures::List { epsilon } => cli::cmd_fixtures_list(&epsilon, json),
            Fixtures::Show { name, epsilon } => cli::cmd_fixtures_show(&name, &epsilon),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
