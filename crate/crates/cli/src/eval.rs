use std::time::Instant;

use anyhow::{bail, Result};
use serde_json::{json, Value};

use mucalc::game::{self, Arena, BoundedGame, Player, SolveMode, Solver, SolverPlayer, Strategy, DEFAULT_CAP};
use mucalc::semantics::{bounded_truth_set, truth_set, Bound};
use mucalc::variants::{self, FBoundedGame, Verdict};

use crate::{parse_semantics, Instance, Loaded, ModeArg, Semantics, EXIT_FALSE, EXIT_TRUE, EXIT_UNDETERMINED};

#[derive(clap::Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub instance: Instance,
    /// standard, bounded:N, omega, fbounded:K or free.
    #[arg(long, default_value = "standard", value_parser = parse_semantics)]
    pub semantics: Semantics,
    /// Clock choices explored by the game solver.
    #[arg(long, value_enum, default_value = "greedy")]
    pub mode: ModeArg,
    /// Print a play where both sides follow the solver.
    #[arg(long)]
    pub trace: bool,
    /// Print the winner's strategy.
    #[arg(long)]
    pub strategy: bool,
    /// Emit a single JSON object instead of text.
    #[arg(long)]
    pub json: bool,
    /// Cross-check standard against bounded:card(M), and the game against the compositional engine.
    #[arg(long)]
    pub check: bool,
    /// Cap on positions stored by the game solver.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub max_positions: usize,
}

/// What a game engine produced, already rendered.
#[derive(Default)]
struct GameOutput {
    positions: Option<usize>,
    strategy: Option<(Vec<String>, Value)>,
    trace: Option<(String, Value)>,
}

fn render_strategy<A: Arena>(arena: &A, strategy: &Strategy<A::Pos>) -> (Vec<String>, Value) {
    let mut rows: Vec<(String, game::PositionView, String)> = strategy
        .iter()
        .map(|(pos, mv)| {
            let view = arena.view(pos);
            (view.to_string(), view, arena.describe_move(mv))
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let text = rows.iter().map(|(v, _, mv)| format!("{v} -> {mv}")).collect();
    let entries: Vec<Value> = rows
        .iter()
        .map(|(_, view, mv)| json!({"state": view.state, "node": view.node, "clocks": view.clocks, "move": mv}))
        .collect();
    (text, json!({"player": strategy.player, "moves": entries}))
}

fn play<A: Arena>(arena: &A, mode: SolveMode, cap: usize) -> Result<(String, Value)> {
    let mut eloise = SolverPlayer {
        solver: Solver::new(arena, mode).with_cap(cap),
    };
    let mut abelard = SolverPlayer {
        solver: Solver::new(arena, mode).with_cap(cap),
    };
    let trace = game::play_trace(arena, &mut eloise, &mut abelard)?;
    Ok((trace.render_text(arena), trace.render_json(arena)))
}

fn run_game<A: Arena>(arena: &A, args: &EvalArgs) -> Result<(Player, GameOutput)> {
    let mode = args.mode.into();
    let solution = game::solve_with_cap(arena, mode, args.max_positions)?;
    let mut out = GameOutput {
        positions: Some(solution.visited),
        ..Default::default()
    };
    if args.strategy {
        out.strategy = Some(render_strategy(arena, &solution.strategy));
    }
    if args.trace {
        out.trace = Some(play(arena, mode, args.max_positions)?);
    }
    Ok((solution.winner, out))
}

pub fn run(args: EvalArgs) -> Result<u8> {
    let started = Instant::now();
    let Loaded { model, sentence, state } = args.instance.load()?;
    let loaded_at = started.elapsed();
    let mode: SolveMode = args.mode.into();

    let (verdict, out) = match args.semantics {
        Semantics::Standard => {
            let holds = truth_set(&model, &sentence)?.contains(state);
            let out = if args.trace || args.strategy {
                // on finite models the omega game decides standard truth
                let game = BoundedGame::new(&model, &sentence, state, Bound::Omega)?;
                let (winner, out) = run_game(&game, &args)?;
                if (winner == Player::Eloise) != holds {
                    bail!("omega game winner {winner} disagrees with standard truth {holds}");
                }
                out
            } else {
                GameOutput::default()
            };
            (Verdict::from(if holds { Player::Eloise } else { Player::Abelard }), out)
        }
        Semantics::Bounded(bound) => {
            let game = BoundedGame::new(&model, &sentence, state, bound)?;
            let (winner, out) = run_game(&game, &args)?;
            if args.check {
                let compositional = bounded_truth_set(&model, &sentence, bound)?.contains(state);
                if compositional != (winner == Player::Eloise) {
                    bail!("check failed: game winner {winner}, compositional {bound} says {compositional}");
                }
            }
            (Verdict::from(winner), out)
        }
        Semantics::FBounded(k) => {
            let solution = variants::solve_fbounded(&model, state, &sentence, k, mode)?;
            let game = FBoundedGame::new(&model, &sentence, state, k)?;
            let mut out = GameOutput {
                positions: Some(solution.visited),
                ..Default::default()
            };
            if args.strategy {
                out.strategy = Some(render_strategy(&game, &solution.strategy));
            }
            if args.trace {
                out.trace = Some(play(&game, mode, args.max_positions)?);
            }
            (solution.verdict, out)
        }
        Semantics::Free => {
            if args.trace || args.strategy {
                eprintln!("note: free games may be undetermined; no strategy or trace is produced");
            }
            let verdict = variants::solve_free(&model, state, &sentence)?;
            let out = GameOutput {
                positions: Some(model.card() * sentence.size()),
                ..Default::default()
            };
            (verdict, out)
        }
    };

    if args.check {
        let standard = truth_set(&model, &sentence)?.contains(state);
        let collapsed = bounded_truth_set(&model, &sentence, Bound::Finite(model.card() as u32))?.contains(state);
        if standard != collapsed {
            bail!(
                "check failed: standard says {standard}, bounded:{} says {collapsed}",
                model.card()
            );
        }
    }
    let total = started.elapsed();

    let word = match verdict {
        Verdict::Eloise => "true",
        Verdict::Abelard => "false",
        Verdict::Undetermined => "undetermined",
    };
    if args.json {
        let report = json!({
            "verdict": word,
            "winner": verdict.to_string(),
            "semantics": args.semantics.to_string(),
            "mode": match mode { SolveMode::Greedy => "greedy", SolveMode::Exhaustive => "exhaustive" },
            "state": model.name(state),
            "formula": sentence.render(),
            "timings": {
                "load_ms": loaded_at.as_secs_f64() * 1e3,
                "total_ms": total.as_secs_f64() * 1e3,
            },
            "positions": out.positions,
            "strategy": out.strategy.as_ref().map(|s| s.1.clone()),
            "trace": out.trace.as_ref().map(|t| t.1.clone()),
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{word}");
        if let Some((lines, value)) = &out.strategy {
            println!("strategy for {}:", value["player"].as_str().unwrap_or("?"));
            for line in lines {
                println!("  {line}");
            }
        }
        if let Some((text, _)) = &out.trace {
            println!("trace:");
            print!("{text}");
        }
    }
    Ok(match verdict {
        Verdict::Eloise => EXIT_TRUE,
        Verdict::Abelard => EXIT_FALSE,
        Verdict::Undetermined => EXIT_UNDETERMINED,
    })
}
