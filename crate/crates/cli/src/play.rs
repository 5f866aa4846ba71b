use std::cell::RefCell;
use std::io::{self, Write};

use anyhow::{bail, Result};
use clap::ValueEnum;

use mucalc::game::{
    self, Arena, BoundedGame, Controller, GameError, Move, Player, ReplPlayer, SolveMode, Solver, SolverPlayer,
};
use mucalc::semantics::Bound;
use mucalc::variants::FBoundedGame;

use crate::{parse_semantics, Instance, Loaded, ModeArg, Semantics, EXIT_ABORTED, EXIT_FALSE, EXIT_TRUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Human {
    Eloise,
    Abelard,
    Both,
}

#[derive(clap::Args)]
pub struct PlayArgs {
    #[command(flatten)]
    pub instance: Instance,
    /// bounded:N, omega or fbounded:K (standard plays the omega game).
    #[arg(long, default_value = "omega", value_parser = parse_semantics)]
    pub semantics: Semantics,
    /// Which side reads moves from standard input.
    #[arg(long, value_enum, default_value = "eloise")]
    pub human: Human,
    /// Clock choices considered by the machine player.
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
}

/// Machine player that reports each move it makes.
struct Announced<'g, A: Arena> {
    inner: SolverPlayer<'g, A>,
}

impl<A: Arena> Controller<A> for Announced<'_, A> {
    fn choose(&mut self, arena: &A, pos: &A::Pos, moves: &[(Move, A::Pos)]) -> Result<usize, GameError> {
        let k = self.inner.choose(arena, pos, moves)?;
        let mover = match arena.status(pos) {
            game::GameStatus::Turn(p) | game::GameStatus::Won(p) => p,
        };
        println!("position {}", arena.view(pos));
        println!("{mover} plays: {}", arena.describe_move(&moves[k].0));
        Ok(k)
    }
}

/// One REPL serving both sides, so they share the buffered input.
struct Shared<'r, C>(&'r RefCell<C>);

impl<A: Arena, C: Controller<A>> Controller<A> for Shared<'_, C> {
    fn choose(&mut self, arena: &A, pos: &A::Pos, moves: &[(Move, A::Pos)]) -> Result<usize, GameError> {
        self.0.borrow_mut().choose(arena, pos, moves)
    }
}

fn session<A: Arena>(arena: &A, human: Human, mode: SolveMode) -> Result<u8> {
    let console = RefCell::new(ReplPlayer {
        input: io::stdin().lock(),
        output: io::stdout(),
    });
    let repl = || Shared(&console);
    let machine = || Announced {
        inner: SolverPlayer {
            solver: Solver::new(arena, mode),
        },
    };
    let (mut e, mut a): (Box<dyn Controller<A> + '_>, Box<dyn Controller<A> + '_>) = match human {
        Human::Eloise => (Box::new(repl()), Box::new(machine())),
        Human::Abelard => (Box::new(machine()), Box::new(repl())),
        Human::Both => (Box::new(repl()), Box::new(repl())),
    };
    match game::play_trace(arena, e.as_mut(), a.as_mut()) {
        Ok(trace) => {
            let last = trace.steps.last().expect("a play has a final position");
            println!("position {}", arena.view(&last.position));
            println!("won: {} after {} rounds", trace.winner, trace.rounds());
            io::stdout().flush()?;
            Ok(if trace.winner == Player::Eloise {
                EXIT_TRUE
            } else {
                EXIT_FALSE
            })
        }
        Err(GameError::Aborted) => {
            println!();
            eprintln!("aborted: end of input");
            Ok(EXIT_ABORTED)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: PlayArgs) -> Result<u8> {
    let Loaded { model, sentence, state } = args.instance.load()?;
    let mode = args.mode.into();
    match args.semantics {
        Semantics::Standard => session(
            &BoundedGame::new(&model, &sentence, state, Bound::Omega)?,
            args.human,
            mode,
        ),
        Semantics::Bounded(b) => session(&BoundedGame::new(&model, &sentence, state, b)?, args.human, mode),
        Semantics::FBounded(k) => session(&FBoundedGame::new(&model, &sentence, state, k)?, args.human, mode),
        Semantics::Free => bail!("free games may never end; play needs a bounded semantics"),
    }
}
