//! `unijoin`: run, benchmark and generate data for conjunctive queries.

mod bench;
mod gen;
mod input;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use unijoin::exec::{ExecError, LeafChoice};
use unijoin::query::{PlanViolation, QueryError};

#[derive(Parser)]
#[command(name = "unijoin", version, about = "Join conjunctive queries with binary, Generic Join and Free Join plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one query under one strategy.
    Run(run::RunArgs),
    /// Time a matrix of strategies on one query.
    Bench(bench::BenchArgs),
    /// Write generated relations, a catalog file and query files.
    Gen(gen::GenArgs),
}

/// Inputs and result shaping shared by `run` and `bench`.
#[derive(Args, Clone)]
pub struct Common {
    /// Catalog file: `name path attr:kind,... [sorted_by=a,b]` per line.
    #[arg(long)]
    pub catalog: PathBuf,
    /// Query file: a conjunctive query and an optional `tree` line.
    #[arg(long)]
    pub query: PathBuf,
    /// Join tree overriding the query file's, e.g. `((R,S),(T,U))`.
    #[arg(long)]
    pub tree: Option<String>,
    /// Leaf layout: auto, map, vec, smallvec:N, range, count or count-where-legal.
    #[arg(long, default_value = "auto")]
    pub leaf: LeafChoice,
    /// Result shape overriding the query head: full, count or min:v1,v2.
    #[arg(long)]
    pub agg: Option<String>,
    /// Compare against the nested-loop oracle.
    #[arg(long)]
    pub check: bool,
}

pub enum Verdict {
    Ok,
    CheckFailed,
}

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<PlanViolation>()
            || matches!(e.downcast_ref::<QueryError>(), Some(QueryError::Plan(_)))
            || matches!(
                e.downcast_ref::<ExecError>(),
                Some(ExecError::Plan(_)) | Some(ExecError::Query(QueryError::Plan(_)))
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run::run(&a),
        Command::Bench(a) => bench::bench(&a),
        Command::Gen(a) => gen::gen(&a).map(|()| Verdict::Ok),
    };
    match res {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::CheckFailed) => ExitCode::from(3),
        Err(e) if is_validation(&e) => {
            eprintln!("validation error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
