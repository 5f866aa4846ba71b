use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mucalc::game::{GameError, SolveMode};
use mucalc::kripke::{generate_family, load_model, KripkeModel, StateId};
use mucalc::reduction::ReductionError;
use mucalc::semantics::Bound;
use mucalc::variants::VariantError;
use mucalc::Sentence;

mod compare;
mod eval;
mod play;
mod reduce;

pub const EXIT_TRUE: u8 = 0;
pub const EXIT_FALSE: u8 = 1;
pub const EXIT_UNDETERMINED: u8 = 2;
pub const EXIT_ABORTED: u8 = 3;
pub const EXIT_ERROR: u8 = 10;
pub const EXIT_CAP: u8 = 11;
pub const EXIT_PARTIAL: u8 = 12;

#[derive(Parser)]
#[command(
    name = "mucalc",
    version,
    about = "Modal mu-calculus model checking with bounded evaluation games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sentence at a state.
    Eval(eval::EvalArgs),
    /// Play the evaluation game interactively.
    Play(play::PlayArgs),
    /// Reduce a (bounded) model-checking instance to an alternating reachability model.
    Reduce(reduce::ReduceArgs),
    /// Cross-check all engines on a corpus of small instances.
    Compare(compare::CompareArgs),
    /// Write a model from a built-in family.
    Gen(GenArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    /// starN, daggerN, chain, clique or ar-grid.
    family: String,
    n: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Model, formula and start state shared by the instance commands.
#[derive(clap::Args, Clone)]
pub struct Instance {
    /// Model file (JSON with "states", "edges", "val").
    #[arg(long)]
    pub model: PathBuf,
    /// Formula text.
    #[arg(long, conflicts_with = "formula_file", required_unless_present = "formula_file")]
    pub formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    /// Start state name (defaults to the first state of the model).
    #[arg(long)]
    pub state: Option<String>,
}

pub struct Loaded {
    pub model: KripkeModel,
    pub sentence: Sentence,
    pub state: StateId,
}

impl Instance {
    pub fn load(&self) -> Result<Loaded> {
        let bytes = std::fs::read(&self.model).with_context(|| format!("reading {}", self.model.display()))?;
        let model = load_model(&bytes).with_context(|| format!("loading {}", self.model.display()))?;
        let text = match (&self.formula, &self.formula_file) {
            (Some(t), _) => t.clone(),
            (None, Some(path)) => {
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, None) => bail!("a formula is required"),
        };
        let sentence = mucalc::parse(text.trim()).context("parsing formula")?.normalize();
        let state = match &self.state {
            Some(name) => model.state(name).ok_or_else(|| anyhow!("unknown state {name:?}"))?,
            None => 0,
        };
        Ok(Loaded { model, sentence, state })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Greedy,
    Exhaustive,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> SolveMode {
        match m {
            ModeArg::Greedy => SolveMode::Greedy,
            ModeArg::Exhaustive => SolveMode::Exhaustive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Standard,
    Bounded(Bound),
    FBounded(u32),
    Free,
}

impl std::fmt::Display for Semantics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Semantics::Standard => f.write_str("standard"),
            Semantics::Bounded(Bound::Omega) => f.write_str("omega"),
            Semantics::Bounded(Bound::Finite(n)) => write!(f, "bounded:{n}"),
            Semantics::FBounded(k) => write!(f, "fbounded:{k}"),
            Semantics::Free => f.write_str("free"),
        }
    }
}

pub fn parse_semantics(text: &str) -> Result<Semantics, String> {
    let positive = |v: &str| match v.parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got {v:?}")),
    };
    match text.split_once(':') {
        None => match text {
            "standard" => Ok(Semantics::Standard),
            "omega" => Ok(Semantics::Bounded(Bound::Omega)),
            "free" => Ok(Semantics::Free),
            _ => Err(format!("unknown semantics {text:?}")),
        },
        Some(("bounded", n)) => Ok(Semantics::Bounded(Bound::Finite(positive(n)?))),
        Some(("fbounded", k)) => Ok(Semantics::FBounded(positive(k)?)),
        Some(_) => Err(format!("unknown semantics {text:?}")),
    }
}

pub fn parse_bound(text: &str) -> Result<Bound, String> {
    match text {
        "omega" => Ok(Bound::Omega),
        n => match n.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(Bound::Finite(n)),
            _ => Err(format!("expected a positive integer or omega, got {text:?}")),
        },
    }
}

fn is_cap_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(e.downcast_ref::<GameError>(), Some(GameError::ResourceLimit(_)))
            || matches!(
                e.downcast_ref::<ReductionError>(),
                Some(ReductionError::Game(GameError::ResourceLimit(_)))
            )
            || matches!(
                e.downcast_ref::<VariantError>(),
                Some(VariantError::Game(GameError::ResourceLimit(_)))
            )
    })
}

fn run_gen(args: GenArgs) -> Result<u8> {
    let model = generate_family(&args.family, args.n)?;
    let json = model.to_json();
    match args.out {
        Some(path) => std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(EXIT_TRUE)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as "undetermined"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_ERROR } else { EXIT_TRUE });
        }
    };
    let result = match cli.command {
        Command::Eval(args) => eval::run(args),
        Command::Play(args) => play::run(args),
        Command::Reduce(args) => reduce::run(args),
        Command::Compare(args) => compare::run(args),
        Command::Gen(args) => run_gen(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_cap_error(&err) { EXIT_CAP } else { EXIT_ERROR })
        }
    }
}
