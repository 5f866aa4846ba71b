//! Bounded evaluation games.
//!
//! Positions are `(state, node, clocks)`. Plays are finite because every
//! revisit of a binder through one of its labels strictly lowers that
//! binder's clock, so the reachable position graph is a finite DAG. The
//! solver runs backward induction over it with memoization.
//!
//! Clock maps are stored canonically by default: only the binders that are
//! strict ancestors of the current node carry a value, every other binder
//! is implicitly at the bound. A binder's clock is always overwritten when
//! the binder is entered, so clocks outside the current ancestry are never
//! read. [`ClockRepr::Full`] keeps the literal map over all binders and
//! exists to cross-check that claim.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::formula::{build_index, NodeId, NodeKind, Sentence, SyntaxIndex};
use crate::kripke::{KripkeModel, StateId};
use crate::semantics::Bound;

/// Default cap on memo-table entries.
pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Player {
    Eloise,
    Abelard,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eloise => Player::Abelard,
            Player::Abelard => Player::Eloise,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Eloise => "Eloise",
            Player::Abelard => "Abelard",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GameStatus {
    Turn(Player),
    Won(Player),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Successor(StateId),
    SetClock(u32),
    /// Pass-through step into a binder body (games without clock choices).
    Enter,
    /// Lower a global counter to the given value.
    Lower(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockValue {
    Finite(u32),
    /// Equal to the bound: not chosen since the last reset.
    Top,
}

impl fmt::Display for ClockValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClockValue::Finite(n) => write!(f, "{n}"),
            ClockValue::Top => f.write_str("top"),
        }
    }
}

/// Binder clocks, sorted by binder id. Missing binders are at `Top`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ClockMap {
    entries: Vec<(NodeId, ClockValue)>,
}

impl ClockMap {
    pub fn new() -> ClockMap {
        ClockMap::default()
    }

    pub fn get(&self, binder: NodeId) -> ClockValue {
        match self.entries.binary_search_by_key(&binder, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => ClockValue::Top,
        }
    }

    pub fn set(&mut self, binder: NodeId, value: ClockValue) {
        match self.entries.binary_search_by_key(&binder, |e| e.0) {
            Ok(i) => self.entries[i].1 = value,
            Err(i) => self.entries.insert(i, (binder, value)),
        }
    }

    /// Keep only the given binders (sorted ascending).
    fn restrict(&mut self, keep: &[NodeId]) {
        self.entries.retain(|(b, _)| keep.binary_search(b).is_ok());
    }

    pub fn entries(&self) -> &[(NodeId, ClockValue)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    pub state: StateId,
    pub node: NodeId,
    pub clocks: ClockMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClockRepr {
    Canonical,
    Full,
}

/// Which clock choices the solver considers.
///
/// `Greedy` only tries the largest value at binders and `current - 1` at
/// labels; `Exhaustive` tries every legal value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("position limit of {0} entries exceeded")]
    ResourceLimit(usize),
    #[error("the position graph contains a cycle at {0}")]
    Cycle(String),
    #[error("strategy is undefined at {0}")]
    StrategyUndefined(String),
    #[error("strategy prescribes an illegal move at {0}")]
    IllegalMove(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("sentence is not in normal form (normalize it first)")]
    NotNormal,
    #[error("label {0} is free")]
    FreeLabel(String),
    #[error("clock bound must be at least 1")]
    ZeroBound,
    #[error("input ended before the game did")]
    Aborted,
    #[error("io error: {0}")]
    Io(String),
}

/// Rendering of a position for traces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositionView {
    pub state: String,
    pub node: String,
    pub clocks: Vec<(String, String)>,
}

impl fmt::Display for PositionView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clocks: Vec<String> = self.clocks.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "({}, {}, [{}])", self.state, self.node, clocks.join(","))
    }
}

/// A finite two-player game with terminal wins.
pub trait Arena {
    type Pos: Clone + Eq + Hash + fmt::Debug;

    fn initial(&self) -> Self::Pos;

    fn status(&self, pos: &Self::Pos) -> GameStatus;

    /// Successor positions in the deterministic move order. Empty for
    /// `Won` positions.
    fn moves(&self, pos: &Self::Pos, mode: SolveMode) -> Vec<(Move, Self::Pos)>;

    fn view(&self, pos: &Self::Pos) -> PositionView;

    fn describe_move(&self, mv: &Move) -> String;
}

/// Owner of a non-terminal node of the evaluation game.
pub(crate) fn node_owner(sentence: &Sentence, index: &SyntaxIndex, node: NodeId) -> Option<Player> {
    match sentence.kind(node) {
        NodeKind::Or | NodeKind::Diamond | NodeKind::Mu(_) => Some(Player::Eloise),
        NodeKind::And | NodeKind::Box | NodeKind::Nu(_) => Some(Player::Abelard),
        NodeKind::Label(_) => match sentence.kind(index.rf(node)?) {
            NodeKind::Mu(_) => Some(Player::Eloise),
            _ => Some(Player::Abelard),
        },
        NodeKind::Prop(_) | NodeKind::NegProp(_) => None,
    }
}

pub(crate) fn describe_basic_move(model: &KripkeModel, mv: &Move) -> String {
    match mv {
        Move::Left => "left".into(),
        Move::Right => "right".into(),
        Move::Successor(v) => format!("go to {}", model.name(*v)),
        Move::SetClock(g) => format!("set clock {g}"),
        Move::Enter => "enter".into(),
        Move::Lower(n) => format!("lower to {n}"),
    }
}

/// The `Γ`-bounded evaluation game `(M, w0, φ0, Γ)`.
#[derive(Clone, Debug)]
pub struct BoundedGame<'a> {
    model: &'a KripkeModel,
    sentence: &'a Sentence,
    index: SyntaxIndex,
    bound: Bound,
    start: StateId,
    repr: ClockRepr,
}

impl<'a> BoundedGame<'a> {
    /// The sentence must be closed and in normal form.
    pub fn new(
        model: &'a KripkeModel,
        sentence: &'a Sentence,
        start: StateId,
        bound: Bound,
    ) -> Result<BoundedGame<'a>, GameError> {
        if let Some(x) = sentence.free_labels(sentence.root()).into_iter().next() {
            return Err(GameError::FreeLabel(x));
        }
        if !sentence.is_normal() {
            return Err(GameError::NotNormal);
        }
        if start >= model.card() {
            return Err(GameError::UnknownState(format!("#{start}")));
        }
        if bound == Bound::Finite(0) {
            return Err(GameError::ZeroBound);
        }
        Ok(BoundedGame {
            model,
            sentence,
            index: build_index(sentence),
            bound,
            start,
            repr: ClockRepr::Canonical,
        })
    }

    pub fn with_repr(mut self, repr: ClockRepr) -> BoundedGame<'a> {
        self.repr = repr;
        self
    }

    /// Same game started from another state.
    pub fn with_start(mut self, start: StateId) -> BoundedGame<'a> {
        assert!(start < self.model.card());
        self.start = start;
        self
    }

    pub fn model(&self) -> &'a KripkeModel {
        self.model
    }

    pub fn sentence(&self) -> &'a Sentence {
        self.sentence
    }

    pub fn index(&self) -> &SyntaxIndex {
        &self.index
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    pub fn repr(&self) -> ClockRepr {
        self.repr
    }

    /// Largest clock value a player may announce at a binder. With an
    /// `Omega` bound the choices are capped at `card(M)`, which is already
    /// more than any finite model needs.
    pub fn max_choice(&self) -> u32 {
        match self.bound {
            Bound::Finite(n) => n - 1,
            Bound::Omega => self.model.card() as u32,
        }
    }

    pub fn initial_position(&self) -> Position {
        self.position_at(self.start)
    }

    /// Initial position at an arbitrary state.
    pub fn position_at(&self, state: StateId) -> Position {
        let mut clocks = ClockMap::new();
        if self.repr == ClockRepr::Full {
            for &b in self.index.mu_nu_nodes() {
                clocks.set(b, ClockValue::Top);
            }
        }
        Position {
            state,
            node: self.sentence.root(),
            clocks,
        }
    }

    pub fn legal_moves(&self, pos: &Position) -> Vec<(Move, Position)> {
        self.moves(pos, SolveMode::Exhaustive)
    }

    fn step(&self, pos: &Position, state: StateId, node: NodeId) -> Position {
        let mut clocks = pos.clocks.clone();
        if self.repr == ClockRepr::Canonical {
            clocks.restrict(self.index.active_ancestors(node));
        }
        Position { state, node, clocks }
    }

    /// Values strictly below `limit` in the deterministic order (largest first).
    fn choices_below(&self, limit: ClockValue, mode: SolveMode) -> Vec<u32> {
        let top = match limit {
            ClockValue::Finite(0) => return Vec::new(),
            ClockValue::Finite(n) => n - 1,
            ClockValue::Top => self.max_choice(),
        };
        match mode {
            SolveMode::Greedy => vec![top],
            SolveMode::Exhaustive => (0..=top).rev().collect(),
        }
    }
}

impl Arena for BoundedGame<'_> {
    type Pos = Position;

    fn initial(&self) -> Position {
        self.initial_position()
    }

    fn status(&self, pos: &Position) -> GameStatus {
        let m = self.model;
        let w = pos.state;
        match self.sentence.kind(pos.node) {
            NodeKind::Prop(p) => GameStatus::Won(if m.holds(p, w) { Player::Eloise } else { Player::Abelard }),
            NodeKind::NegProp(p) => GameStatus::Won(if m.holds(p, w) { Player::Abelard } else { Player::Eloise }),
            NodeKind::Diamond if m.successors(w).is_empty() => GameStatus::Won(Player::Abelard),
            NodeKind::Box if m.successors(w).is_empty() => GameStatus::Won(Player::Eloise),
            NodeKind::Label(_) => {
                let binder = self.index.rf(pos.node).expect("sentence has no free labels");
                let owner = node_owner(self.sentence, &self.index, pos.node).unwrap();
                if pos.clocks.get(binder) == ClockValue::Finite(0) {
                    GameStatus::Won(owner.opponent())
                } else {
                    GameStatus::Turn(owner)
                }
            }
            _ => GameStatus::Turn(node_owner(self.sentence, &self.index, pos.node).unwrap()),
        }
    }

    fn moves(&self, pos: &Position, mode: SolveMode) -> Vec<(Move, Position)> {
        if let GameStatus::Won(_) = self.status(pos) {
            return Vec::new();
        }
        let w = pos.state;
        let children = self.sentence.children(pos.node);
        match self.sentence.kind(pos.node) {
            NodeKind::Or | NodeKind::And => vec![
                (Move::Left, self.step(pos, w, children[0])),
                (Move::Right, self.step(pos, w, children[1])),
            ],
            NodeKind::Diamond | NodeKind::Box => self
                .model
                .successors(w)
                .iter()
                .map(|&v| (Move::Successor(v), self.step(pos, v, children[0])))
                .collect(),
            NodeKind::Mu(_) | NodeKind::Nu(_) => self
                .choices_below(ClockValue::Top, mode)
                .into_iter()
                .map(|g| {
                    let mut next = self.step(pos, w, children[0]);
                    next.clocks.set(pos.node, ClockValue::Finite(g));
                    (Move::SetClock(g), next)
                })
                .collect(),
            NodeKind::Label(_) => {
                let binder = self.index.rf(pos.node).expect("sentence has no free labels");
                let body = self.sentence.body(binder);
                self.choices_below(pos.clocks.get(binder), mode)
                    .into_iter()
                    .map(|g| {
                        let mut next = self.step(pos, w, body);
                        if self.repr == ClockRepr::Full {
                            let end = self.index.subtree_end(body);
                            for &b in self.index.mu_nu_nodes() {
                                if body <= b && b <= end {
                                    next.clocks.set(b, ClockValue::Top);
                                }
                            }
                        }
                        next.clocks.set(binder, ClockValue::Finite(g));
                        (Move::SetClock(g), next)
                    })
                    .collect()
            }
            NodeKind::Prop(_) | NodeKind::NegProp(_) => Vec::new(),
        }
    }

    fn view(&self, pos: &Position) -> PositionView {
        PositionView {
            state: self.model.name(pos.state).to_string(),
            node: self.sentence.path(pos.node),
            clocks: pos
                .clocks
                .entries()
                .iter()
                .map(|(b, v)| {
                    let label = self.sentence.kind(*b).binder_label().unwrap_or("?");
                    (label.to_string(), v.to_string())
                })
                .collect(),
        }
    }

    fn describe_move(&self, mv: &Move) -> String {
        describe_basic_move(self.model, mv)
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    winner: Player,
    best: Option<u32>,
}

/// Memoized backward-induction solver. Positions are solved on demand, so
/// one solver can answer queries from many starting positions.
pub struct Solver<'g, A: Arena> {
    arena: &'g A,
    mode: SolveMode,
    memo: HashMap<A::Pos, Entry>,
    cap: usize,
}

struct Frame<P> {
    pos: P,
    owner: Player,
    moves: Vec<(Move, P)>,
    next: usize,
}

enum Opened<P> {
    Done,
    Frame(Frame<P>),
}

impl<'g, A: Arena> Solver<'g, A> {
    pub fn new(arena: &'g A, mode: SolveMode) -> Solver<'g, A> {
        Solver {
            arena,
            mode,
            memo: HashMap::new(),
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Solver<'g, A> {
        self.cap = cap;
        self
    }

    pub fn arena(&self) -> &'g A {
        self.arena
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    /// Number of memoized positions.
    pub fn visited(&self) -> usize {
        self.memo.len()
    }

    fn record(&mut self, pos: A::Pos, entry: Entry) -> Result<(), GameError> {
        if self.memo.len() >= self.cap {
            return Err(GameError::ResourceLimit(self.cap));
        }
        self.memo.insert(pos, entry);
        Ok(())
    }

    fn open(&mut self, pos: &A::Pos) -> Result<Opened<A::Pos>, GameError> {
        match self.arena.status(pos) {
            GameStatus::Won(p) => {
                self.record(pos.clone(), Entry { winner: p, best: None })?;
                Ok(Opened::Done)
            }
            GameStatus::Turn(owner) => {
                let moves = self.arena.moves(pos, self.mode);
                if moves.is_empty() {
                    self.record(
                        pos.clone(),
                        Entry {
                            winner: owner.opponent(),
                            best: None,
                        },
                    )?;
                    return Ok(Opened::Done);
                }
                Ok(Opened::Frame(Frame {
                    pos: pos.clone(),
                    owner,
                    moves,
                    next: 0,
                }))
            }
        }
    }

    /// Winner from `root` under optimal play. The first winning move in
    /// move order is remembered for strategy extraction.
    pub fn solve(&mut self, root: &A::Pos) -> Result<Player, GameError> {
        if let Some(e) = self.memo.get(root) {
            return Ok(e.winner);
        }
        let mut stack: Vec<Frame<A::Pos>> = Vec::new();
        let mut on_stack: HashSet<A::Pos> = HashSet::new();
        if let Opened::Frame(f) = self.open(root)? {
            on_stack.insert(root.clone());
            stack.push(f);
        }
        while let Some(top) = stack.last_mut() {
            if top.next == top.moves.len() {
                let f = stack.pop().unwrap();
                on_stack.remove(&f.pos);
                self.record(
                    f.pos,
                    Entry {
                        winner: f.owner.opponent(),
                        best: None,
                    },
                )?;
                continue;
            }
            let child = &top.moves[top.next].1;
            if let Some(e) = self.memo.get(child) {
                if e.winner == top.owner {
                    let f = stack.pop().unwrap();
                    on_stack.remove(&f.pos);
                    let best = Some(f.next as u32);
                    self.record(f.pos, Entry { winner: f.owner, best })?;
                } else {
                    top.next += 1;
                }
                continue;
            }
            if on_stack.contains(child) {
                return Err(GameError::Cycle(format!("{}", self.arena.view(child))));
            }
            let child = child.clone();
            if let Opened::Frame(f) = self.open(&child)? {
                on_stack.insert(child);
                stack.push(f);
            }
        }
        Ok(self.memo[root].winner)
    }

    /// The remembered winning move at `pos`, if the player to move wins.
    pub fn best_move(&mut self, pos: &A::Pos) -> Result<Option<(Move, A::Pos)>, GameError> {
        self.solve(pos)?;
        match self.memo[pos].best {
            Some(i) => Ok(Some(self.arena.moves(pos, self.mode).swap_remove(i as usize))),
            None => Ok(None),
        }
    }
}

/// A partial map from positions owned by `player` to moves.
#[derive(Clone, Debug)]
pub struct Strategy<P: Eq + Hash> {
    pub player: Player,
    moves: HashMap<P, Move>,
}

impl<P: Eq + Hash> Strategy<P> {
    pub fn new(player: Player) -> Strategy<P> {
        Strategy {
            player,
            moves: HashMap::new(),
        }
    }

    pub fn get(&self, pos: &P) -> Option<Move> {
        self.moves.get(pos).copied()
    }

    pub fn insert(&mut self, pos: P, mv: Move) {
        self.moves.insert(pos, mv);
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, &Move)> {
        self.moves.iter()
    }
}

#[derive(Clone, Debug)]
pub struct Solution<P: Eq + Hash> {
    pub winner: Player,
    pub strategy: Strategy<P>,
    /// Positions memoized while solving and extracting the strategy.
    pub visited: usize,
}

/// Winner's strategy on every position reachable when the winner follows
/// it and the opponent plays any move of the solver's move set.
pub fn extract_strategy<A: Arena>(solver: &mut Solver<'_, A>, root: &A::Pos) -> Result<Strategy<A::Pos>, GameError> {
    let winner = solver.solve(root)?;
    let arena = solver.arena();
    let mut strategy = Strategy::new(winner);
    let mut seen: HashSet<A::Pos> = HashSet::new();
    let mut queue = VecDeque::from([root.clone()]);
    seen.insert(root.clone());
    while let Some(pos) = queue.pop_front() {
        match arena.status(&pos) {
            GameStatus::Won(_) => {}
            GameStatus::Turn(p) if p == winner => {
                let (mv, next) = solver
                    .best_move(&pos)?
                    .ok_or_else(|| GameError::StrategyUndefined(arena.view(&pos).to_string()))?;
                strategy.insert(pos, mv);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
            GameStatus::Turn(_) => {
                for (_, next) in arena.moves(&pos, solver.mode()) {
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    Ok(strategy)
}

/// Solves from the arena's initial position and extracts the winner's
/// strategy.
pub fn solve<A: Arena>(arena: &A, mode: SolveMode) -> Result<Solution<A::Pos>, GameError> {
    solve_with_cap(arena, mode, DEFAULT_CAP)
}

pub fn solve_with_cap<A: Arena>(arena: &A, mode: SolveMode, cap: usize) -> Result<Solution<A::Pos>, GameError> {
    let mut solver = Solver::new(arena, mode).with_cap(cap);
    let root = arena.initial();
    let winner = solver.solve(&root)?;
    let strategy = extract_strategy(&mut solver, &root)?;
    Ok(Solution {
        winner,
        strategy,
        visited: solver.visited(),
    })
}

/// Plays `strategy` against every opponent move sequence (all legal moves,
/// including every clock value). `Ok(true)` iff every play ends in a win
/// for the strategy's player.
pub fn validate_strategy<A: Arena>(arena: &A, strategy: &Strategy<A::Pos>, root: &A::Pos) -> Result<bool, GameError> {
    let player = strategy.player;
    let mut seen: HashSet<A::Pos> = HashSet::new();
    let mut stack = vec![root.clone()];
    seen.insert(root.clone());
    while let Some(pos) = stack.pop() {
        let next: Vec<A::Pos> = match arena.status(&pos) {
            GameStatus::Won(p) => {
                if p != player {
                    return Ok(false);
                }
                continue;
            }
            GameStatus::Turn(p) if p == player => {
                let mv = strategy
                    .get(&pos)
                    .ok_or_else(|| GameError::StrategyUndefined(arena.view(&pos).to_string()))?;
                match arena
                    .moves(&pos, SolveMode::Exhaustive)
                    .into_iter()
                    .find(|(m, _)| *m == mv)
                {
                    Some((_, n)) => vec![n],
                    None => return Err(GameError::IllegalMove(arena.view(&pos).to_string())),
                }
            }
            GameStatus::Turn(p) => {
                let moves = arena.moves(&pos, SolveMode::Exhaustive);
                if moves.is_empty() && p != player {
                    continue;
                }
                moves.into_iter().map(|(_, n)| n).collect()
            }
        };
        for n in next {
            if seen.insert(n.clone()) {
                stack.push(n);
            }
        }
    }
    Ok(true)
}

/// Explicit reachable position graph.
#[derive(Clone, Debug)]
pub struct PositionGraph<P> {
    pub positions: Vec<P>,
    pub status: Vec<GameStatus>,
    pub succ: Vec<Vec<(Move, usize)>>,
}

impl<P> PositionGraph<P> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Kahn's algorithm over the successor relation.
    pub fn is_acyclic(&self) -> bool {
        let n = self.positions.len();
        let mut indeg = vec![0usize; n];
        for list in &self.succ {
            for (_, j) in list {
                indeg[*j] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut removed = 0;
        while let Some(i) = ready.pop() {
            removed += 1;
            for (_, j) in &self.succ[i] {
                indeg[*j] -= 1;
                if indeg[*j] == 0 {
                    ready.push(*j);
                }
            }
        }
        removed == n
    }
}

/// Breadth-first enumeration of every position reachable from the initial
/// one under `mode`. Index 0 is the initial position.
pub fn explore<A: Arena>(arena: &A, mode: SolveMode, cap: usize) -> Result<PositionGraph<A::Pos>, GameError> {
    let root = arena.initial();
    let mut ids: HashMap<A::Pos, usize> = HashMap::new();
    let mut graph = PositionGraph {
        positions: vec![root.clone()],
        status: vec![arena.status(&root)],
        succ: vec![Vec::new()],
    };
    ids.insert(root, 0);
    let mut i = 0;
    while i < graph.positions.len() {
        let pos = graph.positions[i].clone();
        let mut out = Vec::new();
        for (mv, next) in arena.moves(&pos, mode) {
            let j = match ids.get(&next) {
                Some(&j) => j,
                None => {
                    if graph.positions.len() >= cap {
                        return Err(GameError::ResourceLimit(cap));
                    }
                    let j = graph.positions.len();
                    graph.status.push(arena.status(&next));
                    graph.positions.push(next.clone());
                    graph.succ.push(Vec::new());
                    ids.insert(next, j);
                    j
                }
            };
            out.push((mv, j));
        }
        graph.succ[i] = out;
        i += 1;
    }
    Ok(graph)
}

/// Chooses moves for one player during a play.
pub trait Controller<A: Arena> {
    /// Index into `moves` (all legal moves in move order).
    fn choose(&mut self, arena: &A, pos: &A::Pos, moves: &[(Move, A::Pos)]) -> Result<usize, GameError>;
}

/// Follows a fixed strategy.
pub struct StrategyPlayer<'s, P: Eq + Hash> {
    pub strategy: &'s Strategy<P>,
}

impl<A: Arena> Controller<A> for StrategyPlayer<'_, A::Pos> {
    fn choose(&mut self, arena: &A, pos: &A::Pos, moves: &[(Move, A::Pos)]) -> Result<usize, GameError> {
        let mv = self
            .strategy
            .get(pos)
            .ok_or_else(|| GameError::StrategyUndefined(arena.view(pos).to_string()))?;
        moves
            .iter()
            .position(|(m, _)| *m == mv)
            .ok_or_else(|| GameError::IllegalMove(arena.view(pos).to_string()))
    }
}

/// Plays the solver's winning move where one exists and the first legal
/// move otherwise. Off-strategy positions are solved on demand.
pub struct SolverPlayer<'g, A: Arena> {
    pub solver: Solver<'g, A>,
}

impl<A: Arena> Controller<A> for SolverPlayer<'_, A> {
    fn choose(&mut self, _arena: &A, pos: &A::Pos, moves: &[(Move, A::Pos)]) -> Result<usize, GameError> {
        match self.solver.best_move(pos)? {
            Some((mv, _)) => Ok(moves.iter().position(|(m, _)| *m == mv).unwrap_or(0)),
            None => Ok(0),
        }
    }
}

/// Always picks the move at a fixed index (clamped); handy for scripted opponents.
pub struct FirstMovePlayer;

impl<A: Arena> Controller<A> for FirstMovePlayer {
    fn choose(&mut self, _arena: &A, _pos: &A::Pos, _moves: &[(Move, A::Pos)]) -> Result<usize, GameError> {
        Ok(0)
    }
}

/// Interactive player: prints the position and the numbered legal moves,
/// then reads a 1-based move index. Invalid input re-prompts; end of input
/// aborts the play.
pub struct ReplPlayer<R, W> {
    pub input: R,
    pub output: W,
}

impl<A: Arena, R: BufRead, W: Write> Controller<A> for ReplPlayer<R, W> {
    fn choose(&mut self, arena: &A, pos: &A::Pos, moves: &[(Move, A::Pos)]) -> Result<usize, GameError> {
        let io = |e: std::io::Error| GameError::Io(e.to_string());
        let mover = match arena.status(pos) {
            GameStatus::Turn(p) => p,
            GameStatus::Won(p) => p,
        };
        writeln!(self.output, "position {}", arena.view(pos)).map_err(io)?;
        writeln!(self.output, "{mover} to move:").map_err(io)?;
        for (i, (mv, _)) in moves.iter().enumerate() {
            writeln!(self.output, "  {}. {}", i + 1, arena.describe_move(mv)).map_err(io)?;
        }
        loop {
            write!(self.output, "> ").map_err(io)?;
            self.output.flush().map_err(io)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Err(GameError::Aborted);
            }
            match line.trim().parse::<usize>() {
                Ok(k) if (1..=moves.len()).contains(&k) => return Ok(k - 1),
                _ => writeln!(self.output, "enter a number between 1 and {}", moves.len()).map_err(io)?,
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceStep<P> {
    pub position: P,
    /// Mover and chosen move; `None` on the final position.
    pub turn: Option<(Player, Move)>,
}

#[derive(Clone, Debug)]
pub struct Trace<P> {
    pub steps: Vec<TraceStep<P>>,
    pub winner: Player,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    round: usize,
    state: &'a str,
    node: &'a str,
    clocks: &'a [(String, String)],
    player: Option<Player>,
    #[serde(rename = "move")]
    mv: Option<String>,
    winner: Option<Player>,
}

impl<P> Trace<P> {
    /// Number of rounds played (moves made).
    pub fn rounds(&self) -> usize {
        self.steps.len() - 1
    }

    /// One line per round: `k: (state, node-path, clocks) | player: move`,
    /// closed by `k: (...) | won: winner`.
    pub fn render_text<A: Arena<Pos = P>>(&self, arena: &A) -> String {
        let mut out = String::new();
        for (k, step) in self.steps.iter().enumerate() {
            let view = arena.view(&step.position);
            match &step.turn {
                Some((p, mv)) => out.push_str(&format!("{k}: {view} | {p}: {}\n", arena.describe_move(mv))),
                None => out.push_str(&format!("{k}: {view} | won: {}\n", self.winner)),
            }
        }
        out
    }

    pub fn render_json<A: Arena<Pos = P>>(&self, arena: &A) -> serde_json::Value {
        let lines: Vec<serde_json::Value> = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, step)| {
                let view = arena.view(&step.position);
                let line = TraceLine {
                    round: k,
                    state: &view.state,
                    node: &view.node,
                    clocks: &view.clocks,
                    player: step.turn.map(|t| t.0),
                    mv: step.turn.map(|t| arena.describe_move(&t.1)),
                    winner: if step.turn.is_none() { Some(self.winner) } else { None },
                };
                serde_json::to_value(line).expect("trace serialization")
            })
            .collect();
        serde_json::Value::Array(lines)
    }
}

/// Plays one game from the initial position. Every play is finite, but a
/// step limit guards against arenas that are not.
pub fn play_trace<A: Arena>(
    arena: &A,
    eloise: &mut dyn Controller<A>,
    abelard: &mut dyn Controller<A>,
) -> Result<Trace<A::Pos>, GameError> {
    play_from(arena, arena.initial(), eloise, abelard)
}

pub fn play_from<A: Arena>(
    arena: &A,
    start: A::Pos,
    eloise: &mut dyn Controller<A>,
    abelard: &mut dyn Controller<A>,
) -> Result<Trace<A::Pos>, GameError> {
    let mut steps = Vec::new();
    let mut pos = start;
    let mut seen: HashSet<A::Pos> = HashSet::new();
    loop {
        if !seen.insert(pos.clone()) {
            return Err(GameError::Cycle(arena.view(&pos).to_string()));
        }
        match arena.status(&pos) {
            GameStatus::Won(p) => {
                steps.push(TraceStep {
                    position: pos,
                    turn: None,
                });
                return Ok(Trace { steps, winner: p });
            }
            GameStatus::Turn(p) => {
                let moves = arena.moves(&pos, SolveMode::Exhaustive);
                if moves.is_empty() {
                    steps.push(TraceStep {
                        position: pos,
                        turn: None,
                    });
                    return Ok(Trace {
                        steps,
                        winner: p.opponent(),
                    });
                }
                let controller: &mut dyn Controller<A> = match p {
                    Player::Eloise => eloise,
                    Player::Abelard => abelard,
                };
                let i = controller.choose(arena, &pos, &moves)?;
                let (mv, next) = moves
                    .into_iter()
                    .nth(i)
                    .ok_or_else(|| GameError::IllegalMove(arena.view(&pos).to_string()))?;
                steps.push(TraceStep {
                    position: pos,
                    turn: Some((p, mv)),
                });
                pos = next;
            }
        }
    }
}
