use std::time::Instant;

use anyhow::{bail, Result};
use rayon::prelude::*;

use mucalc::corpus::{enumerate_sentences, random_models, random_sentences};
use mucalc::crosscheck::{broken_bounded, check_pair, minimize, Check, Config, HarnessError, Report};
use mucalc::game::GameError;
use mucalc::kripke::{enumerate_models, KripkeModel};
use mucalc::semantics::Bound;
use mucalc::Sentence;

use crate::{parse_bound, EXIT_FALSE, EXIT_PARTIAL, EXIT_TRUE};

const LABELS: [&str; 4] = ["X", "Y", "Z", "U"];

fn parse_check(text: &str) -> Result<Check, String> {
    Check::ALL
        .into_iter()
        .find(|c| c.name() == text)
        .ok_or_else(|| format!("unknown check {text:?}"))
}

#[derive(clap::Args)]
pub struct CompareArgs {
    /// Largest model size.
    #[arg(long, default_value_t = 2)]
    pub max_states: usize,
    #[arg(long, default_value_t = 1)]
    pub max_binders: usize,
    /// Largest sentence size (syntax-tree nodes) in the exhaustive corpus.
    #[arg(long, default_value_t = 5)]
    pub max_nodes: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,omega", value_parser = parse_bound)]
    pub gammas: Vec<Bound>,
    #[arg(long, value_delimiter = ',', default_value = "p,q")]
    pub props: Vec<String>,
    /// Restrict to these checks (all by default).
    #[arg(long, value_delimiter = ',', value_parser = parse_check)]
    pub checks: Vec<Check>,
    /// Seed for sampled models and random sentences.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample this many random models instead of enumerating all of them.
    /// Sampling is automatic above two states.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Extra random sentences with up to `max-nodes + 4` nodes.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    /// Position cap per instance; instances over it are skipped.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_positions: usize,
    #[arg(long, hide = true)]
    pub inject_bug: bool,
}

fn models(args: &CompareArgs) -> Vec<KripkeModel> {
    let props: Vec<&str> = args.props.iter().map(String::as_str).collect();
    match args.samples {
        None if args.max_states <= 2 => (1..=args.max_states)
            .flat_map(|n| enumerate_models(n, &props))
            .collect(),
        samples => random_models(samples.unwrap_or(200), args.seed, args.max_states, &props),
    }
}

fn sentences(args: &CompareArgs) -> Vec<Sentence> {
    let props: Vec<&str> = args.props.iter().map(String::as_str).collect();
    let labels = &LABELS[..args.max_binders.min(LABELS.len())];
    let mut out = enumerate_sentences(args.max_nodes, args.max_binders, &props, labels);
    out.extend(random_sentences(
        args.random,
        args.seed,
        args.max_nodes + 4,
        args.max_binders,
        &props,
        labels,
    ));
    out
}

pub fn run(args: CompareArgs) -> Result<u8> {
    if args.max_states == 0 || args.props.is_empty() {
        bail!("need at least one state and one proposition");
    }
    let started = Instant::now();
    let cfg = Config {
        gammas: args.gammas.clone(),
        checks: if args.checks.is_empty() {
            Check::ALL.to_vec()
        } else {
            args.checks.clone()
        },
        bounded: if args.inject_bug {
            broken_bounded
        } else {
            Config::default().bounded
        },
        cap: args.max_positions,
        ..Config::default()
    };
    let models = models(&args);
    let sentences = sentences(&args);
    println!(
        "corpus: {} models, {} sentences, seed {}, gammas {}",
        models.len(),
        sentences.len(),
        args.seed,
        args.gammas.iter().map(Bound::to_string).collect::<Vec<_>>().join(",")
    );

    let pairs: Vec<(&KripkeModel, &Sentence)> = models
        .iter()
        .flat_map(|m| sentences.iter().map(move |s| (m, s)))
        .collect();
    // collect keeps input order, so the merged report does not depend on scheduling
    let results: Vec<Result<Report, HarnessError>> = pairs.par_iter().map(|(m, s)| check_pair(&cfg, m, s)).collect();

    let mut report = Report::default();
    let mut skipped = 0usize;
    for result in results {
        match result {
            Ok(r) => report.merge(r),
            Err(HarnessError::Game(GameError::ResourceLimit(_))) => skipped += 1,
            Err(e) => bail!("{e}"),
        }
    }

    println!("{:<22} {:>10} {:>8}", "check", "checked", "failed");
    print!("{}", report.matrix());
    println!("elapsed: {:.2}s", started.elapsed().as_secs_f64());
    if !report.all_agree() {
        for cx in report.first_failure.values() {
            println!("counterexample (minimized):");
            println!("{}", minimize(&cfg, cx));
        }
        return Ok(EXIT_FALSE);
    }
    if skipped > 0 {
        println!(
            "partial: {skipped} instances exceeded the position cap of {}",
            args.max_positions
        );
        return Ok(EXIT_PARTIAL);
    }
    println!("all agree");
    Ok(EXIT_TRUE)
}
