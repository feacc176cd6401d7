use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use robin_rd::subsuper::PairKind;
use robin_rd_explorer::commands::{eigs, enumerate, example, multiplicity, solve, sweep, verify};
use robin_rd_explorer::{Overrides, RunConfig, Session, Status};

#[derive(Parser, Debug)]
#[command(
    name = "robin-rd",
    version,
    about = "Positive steady states of a coupled reaction-diffusion system with Robin boundary conditions"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of interior grid nodes.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cross-check against the shooting oracle.
    #[arg(long, global = true)]
    oracle: bool,
    /// Fixed value for the domain constant C1.
    #[arg(long, global = true)]
    c1: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Sub,
    Super,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Principal eigenvalue threshold A1 and the sign table of rho.
    Eigs,
    /// Minimal and maximal solutions at one parameter point.
    Solve {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Solve over the configured parameters and write sweep.csv.
    Sweep,
    /// Check a pair file (x,u,v) as a sub- or supersolution.
    Verify {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        strict: bool,
    },
    /// Three-solution window, gates and certified lattice points.
    Multiplicity,
    /// All solutions found by shooting at one parameter point.
    Enumerate {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        box_max: Option<f64>,
        #[arg(long)]
        density: Option<usize>,
    },
    /// Full report for the built-in family.
    Example,
}

fn run(cli: Cli) -> Result<Status> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let session = Session::new(
        config,
        Overrides {
            grid: cli.grid,
            out: cli.out,
            oracle: cli.oracle,
            c1: cli.c1,
        },
    )?;
    let status = match cli.command {
        Command::Eigs => {
            let (r, s) = eigs::run(&session)?;
            eigs::print(&r);
            s
        }
        Command::Solve { lambda, mu } => {
            let (r, s) = solve::run(&session, lambda, mu)?;
            solve::print(&r);
            s
        }
        Command::Sweep => {
            let (r, s) = sweep::run(&session)?;
            sweep::print(&r);
            s
        }
        Command::Verify {
            pair,
            lambda,
            mu,
            kind,
            strict,
        } => {
            let kind = match kind {
                Kind::Sub => PairKind::Sub,
                Kind::Super => PairKind::Super,
            };
            let (r, s) = verify::run(&session, &pair, lambda, mu, kind, strict)?;
            verify::print(&r);
            s
        }
        Command::Multiplicity => {
            let (r, s) = multiplicity::run(&session)?;
            multiplicity::print(&r);
            s
        }
        Command::Enumerate {
            lambda,
            mu,
            box_max,
            density,
        } => {
            let (r, s) = enumerate::run(&session, lambda, mu, box_max, density)?;
            enumerate::print(&r);
            s
        }
        Command::Example => {
            let (r, s) = example::run(&session)?;
            example::print(&r);
            s
        }
    };
    Ok(status)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
