//! `liftlab`: generate instances, run solvers, write and check proofs, and
//! run rank experiments. Exit codes: 0 ok, 1 semantic failure, 2 usage
//! error, 3 budget exhausted.

mod gen;
mod prove;
mod rank;
mod solve;
mod util;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "liftlab", version, about = "Pebbling, lifting and proof-complexity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write DAG, pebbling formula and lifted formula files.
    Gen(gen::GenArgs),
    /// Run pebbling, decision-tree and Nullstellensatz solvers and cross-check them.
    Solve(solve::SolveArgs),
    /// Generate a cutting-planes refutation with a metrics sidecar.
    Prove(prove::ProveArgs),
    /// Replay a cutting-planes proof and report its metrics.
    Verify(prove::VerifyArgs),
    /// Rank experiments on composed matrices.
    Rank(rank::RankArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Prove(a) => prove::run_prove(a),
        Command::Verify(a) => prove::run_verify(a),
        Command::Rank(a) => rank::run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
