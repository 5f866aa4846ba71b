use std::path::PathBuf;

use anyhow::{Context, Result};

use mucalc::game::DEFAULT_CAP;
use mucalc::reduction::{build_position_model_with_cap, build_position_tree};
use mucalc::semantics::Bound;

use crate::{parse_bound, Instance, Loaded, EXIT_TRUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaArg {
    Bound(Bound),
    /// `max(1, card(M))`, which decides standard truth.
    Auto,
}

fn parse_gamma(text: &str) -> Result<GammaArg, String> {
    match text {
        "auto" => Ok(GammaArg::Auto),
        _ => parse_bound(text).map(GammaArg::Bound),
    }
}

#[derive(clap::Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub instance: Instance,
    /// N, omega, or auto for card(M).
    #[arg(long, default_value = "auto", value_parser = parse_gamma)]
    pub gamma: GammaArg,
    /// Unfold shared positions into a tree.
    #[arg(long)]
    pub tree: bool,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub max_positions: usize,
}

pub fn run(args: ReduceArgs) -> Result<u8> {
    let Loaded { model, sentence, state } = args.instance.load()?;
    let bound = match args.gamma {
        GammaArg::Bound(b) => b,
        GammaArg::Auto => Bound::Finite(Bound::Omega.effective(model.card())),
    };
    let reduced = if args.tree {
        build_position_tree(&model, state, &sentence, bound, args.max_positions)?
    } else {
        build_position_model_with_cap(&model, state, &sentence, bound, args.max_positions)?
    };
    let text = serde_json::to_string_pretty(&reduced.to_json())?;
    let summary = format!(
        "root: {}\npositions: {}",
        reduced.model.name(reduced.root),
        reduced.len()
    );
    match &args.out {
        Some(path) => {
            std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}");
        }
        None => {
            println!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(EXIT_TRUE)
}
