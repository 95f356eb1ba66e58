//! `claro`: load a model file, analyze one causal claim, print the report.
//!
//! Exit codes: 0 = analysis completed (identified or not), 2 = input error,
//! 3 = search budget exceeded, 4 = numerical failure.

mod model;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use claro::graph::SOFT_VARIABLE_LIMIT;
use claro::identification::{TargetEdge, DEFAULT_BUDGET};
use claro::robustness::{analyze, AnalysisOptions, Query};
use claro::{CausalGraph, Error};

use model::ModelSpec;

/// Robustness analysis for causal claims in linear models over mixed
/// acyclic graphs.
#[derive(Parser)]
#[command(name = "claro", version, about)]
struct Args {
    /// Model file: JSON with "variables", "directed", "bidirected".
    model: PathBuf,

    /// Claim to analyze: "edge:<name>-><name>" or "te:<name>-><name>".
    #[arg(long)]
    query: String,

    /// Cross-check graphical verdicts against the numeric rank oracle and
    /// report disagreements as caveats.
    #[arg(long)]
    oracle: bool,

    /// Seed for every randomized numeric check.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Cap on lattice nodes visited by the searches.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    /// Also write the machine-readable report to this path.
    #[arg(long)]
    json: Option<PathBuf>,

    /// Cap on conditioning-set size in the instrument search.
    #[arg(long)]
    max_z: Option<usize>,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn from_core(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded(_) => 3,
            Error::NumericalFailure(_)
            | Error::InvalidInstantiation(_)
            | Error::DegenerateConditioning
            | Error::DegenerateEvaluation(_)
            | Error::InconclusiveDistinctness(_) => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn parse_query(g: &CausalGraph, text: &str) -> Result<Query, Failure> {
    let shape = || {
        Failure::input(format!(
            "query `{text}`: expected `edge:<name>-><name>` or `te:<name>-><name>`"
        ))
    };
    let (kind, rest) = text.split_once(':').ok_or_else(shape)?;
    let (x, y) = rest.split_once("->").ok_or_else(shape)?;
    let x = g.var(x).map_err(|e| Failure::input(format!("query: {e}")))?;
    let y = g.var(y).map_err(|e| Failure::input(format!("query: {e}")))?;
    match kind {
        "edge" => Ok(Query::Edge(TargetEdge { tail: x, head: y })),
        "te" => Ok(Query::TotalEffect { cause: x, outcome: y }),
        _ => Err(shape()),
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| Failure::input(format!("{}: {e}", args.model.display())))?;
    let spec = ModelSpec::parse(&text).map_err(Failure::input)?;
    let g = spec.to_graph().map_err(Failure::input)?;
    if g.var_count() > SOFT_VARIABLE_LIMIT {
        eprintln!(
            "warning: {} variables (comfortable limit {}); searches are exponential in \
             the number of missing edges and may need --budget headroom",
            g.var_count(),
            SOFT_VARIABLE_LIMIT
        );
    }
    let query = parse_query(&g, &args.query)?;
    let options = AnalysisOptions {
        seed: args.seed,
        budget: args.budget,
        max_z: args.max_z,
        oracle_check: args.oracle,
        ..AnalysisOptions::default()
    };
    let result = analyze(&g, &query, &options).map_err(Failure::from_core)?;
    print!("{}", report::human(&result));
    if let Some(path) = &args.json {
        fs::write(path, report::machine_bytes(&result))
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // --help and --version are successes; real usage errors are
            // input errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
