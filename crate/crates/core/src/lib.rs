//! Modal mu-calculus toolkit: parsing, compositional semantics, bounded
//! evaluation games and their variants, and reductions to alternating
//! reachability games.

pub mod corpus;
pub mod crosscheck;
pub mod formula;
pub mod game;
pub mod kripke;
pub mod reduction;
pub mod semantics;
pub mod variants;

pub use formula::{build_index, parse, NodeId, NodeKind, Sentence, SyntaxIndex};
pub use game::{BoundedGame, GameError, GameStatus, Move, Player, Position, SolveMode};
pub use kripke::{generate_family, load_model, Assignment, KripkeModel, StateId, StateSet};
pub use reduction::{build_position_model, chi, reduce_mc, solve_ar};
pub use semantics::{eval_bounded, eval_standard, Bound};
pub use variants::{solve_fbounded, solve_free, Verdict};
