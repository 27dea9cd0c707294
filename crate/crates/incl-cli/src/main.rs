//! `incl`: parse, evaluate, normalise, approximate and prove with inclusion logic.
//!
//! Exit codes: 0 success / true / accepted / derivable, 1 false / rejected /
//! refuted, 2 error, 3 unknown.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "incl", version, about = "Inclusion logic toolkit")]
pub struct Cli {
    /// Output format: human-readable text or one JSON record per result.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 2024, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum EngineArg {
    Naive,
    Fast,
    Both,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct FormulaSource {
    /// Formula text.
    #[arg(long)]
    pub formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GuardArgs {
    /// Largest team the brute-force evaluator splits.
    #[arg(long, default_value_t = 8)]
    pub guard_rows: usize,
    /// Largest universe the brute-force evaluator accepts.
    #[arg(long, default_value_t = 4)]
    pub guard_universe: usize,
    /// Largest quantifier depth the brute-force evaluator accepts.
    #[arg(long, default_value_t = 4)]
    pub guard_depth: usize,
    /// Step budget of the brute-force evaluator.
    #[arg(long, default_value_t = 1_000_000)]
    pub guard_steps: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a formula and dump its syntax tree.
    Parse {
        #[command(flatten)]
        source: FormulaSource,
    },
    /// Evaluate a formula on a model and team.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        team: PathBuf,
        #[command(flatten)]
        source: FormulaSource,
        #[arg(long, value_enum, default_value_t = EngineArg::Fast)]
        engine: EngineArg,
        /// Also print the largest satisfying subteam.
        #[arg(long)]
        max_subteam: bool,
        #[command(flatten)]
        guards: GuardArgs,
    },
    /// Print the normal form of a formula.
    Nf {
        #[command(flatten)]
        source: FormulaSource,
    },
    /// Print the level-n approximation of a sentence, and its truth on a model.
    Approx {
        #[command(flatten)]
        source: FormulaSource,
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// The strengthened variant with equalities inlined.
        #[arg(long)]
        strong: bool,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Highest level allowed.
        #[arg(long, default_value_t = inclusion_logic::approx::DEFAULT_MAX_LEVEL)]
        cap: usize,
    },
    /// Check proof scripts.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Decide whether inclusion atoms imply another.
    Implies {
        /// Premises separated by `;`.
        #[arg(long, default_value = "")]
        gamma: String,
        /// The goal atom.
        #[arg(long)]
        phi: String,
        /// Rows of counterexample teams.
        #[arg(long, default_value_t = 3)]
        rows: usize,
        /// Values in counterexample teams.
        #[arg(long, default_value_t = 3)]
        elems: usize,
        /// Transitivity steps explored.
        #[arg(long, default_value_t = inclusion_logic::ind::DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Check the bundled proof corpus and run the property suites.
    Corpus {
        /// Random instances per property suite.
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
}

/// What a command concluded, mapped to the exit code.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    Yes,
    No,
    Unknown,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = output::Output::new(cli.format);
    match commands::run(&cli, &mut out) {
        Ok(Outcome::Yes) => ExitCode::from(0),
        Ok(Outcome::No) => ExitCode::from(1),
        Ok(Outcome::Unknown) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
