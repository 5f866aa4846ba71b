//! Clock-free variants of the evaluation game.
//!
//! In the f-bounded game each player owns one global counter, both starting
//! at `f = card(M)^k * |φ|`. Binders are passed through; a label owned by a
//! player forces that player to lower their counter, and a player whose
//! counter is already 0 loses there. The free game drops counters
//! altogether, so plays may run forever and neither player need win.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{build_index, NodeId, NodeKind, Sentence, SyntaxIndex};
use crate::game::{
    describe_basic_move, extract_strategy, node_owner, Arena, GameError, GameStatus, Move, Player, PositionView,
    SolveMode, Solver, Strategy, DEFAULT_CAP,
};
use crate::kripke::{KripkeModel, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Eloise,
    Abelard,
    Undetermined,
}

impl From<Player> for Verdict {
    fn from(p: Player) -> Verdict {
        match p {
            Player::Eloise => Verdict::Eloise,
            Player::Abelard => Verdict::Abelard,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Eloise => "Eloise",
            Verdict::Abelard => "Abelard",
            Verdict::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VariantError {
    #[error("the exponent k must be at least 1")]
    ZeroExponent,
    #[error("f(M, φ) overflows a 64-bit counter")]
    Overflow,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// `card(M)^k * |φ|`, with `|φ|` the node count of the sentence.
pub fn f_value(m: &KripkeModel, s: &Sentence, k: u32) -> Result<u64, VariantError> {
    if k == 0 {
        return Err(VariantError::ZeroExponent);
    }
    (m.card() as u64)
        .checked_pow(k)
        .and_then(|c| c.checked_mul(s.size() as u64))
        .ok_or(VariantError::Overflow)
}

fn check_sentence(m: &KripkeModel, s: &Sentence, start: StateId) -> Result<(), GameError> {
    if let Some(x) = s.free_labels(s.root()).into_iter().next() {
        return Err(GameError::FreeLabel(x));
    }
    if !s.is_normal() {
        return Err(GameError::NotNormal);
    }
    if start >= m.card() {
        return Err(GameError::UnknownState(format!("#{start}")));
    }
    Ok(())
}

/// Terminal status shared by both variants; `None` for positions that are
/// not decided by the node and state alone.
fn basic_status(m: &KripkeModel, s: &Sentence, w: StateId, node: NodeId) -> Option<Player> {
    match s.kind(node) {
        NodeKind::Prop(p) => Some(if m.holds(p, w) { Player::Eloise } else { Player::Abelard }),
        NodeKind::NegProp(p) => Some(if m.holds(p, w) { Player::Abelard } else { Player::Eloise }),
        NodeKind::Diamond if m.successors(w).is_empty() => Some(Player::Abelard),
        NodeKind::Box if m.successors(w).is_empty() => Some(Player::Eloise),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FPosition {
    pub state: StateId,
    pub node: NodeId,
    pub gamma_e: u64,
    pub gamma_a: u64,
}

#[derive(Clone, Debug)]
pub struct FBoundedGame<'a> {
    model: &'a KripkeModel,
    sentence: &'a Sentence,
    index: SyntaxIndex,
    start: StateId,
    f: u64,
}

impl<'a> FBoundedGame<'a> {
    pub fn new(
        model: &'a KripkeModel,
        sentence: &'a Sentence,
        start: StateId,
        k: u32,
    ) -> Result<FBoundedGame<'a>, VariantError> {
        let f = f_value(model, sentence, k)?;
        Ok(FBoundedGame::with_f(model, sentence, start, f)?)
    }

    /// Game with an explicit counter limit.
    pub fn with_f(
        model: &'a KripkeModel,
        sentence: &'a Sentence,
        start: StateId,
        f: u64,
    ) -> Result<FBoundedGame<'a>, GameError> {
        check_sentence(model, sentence, start)?;
        Ok(FBoundedGame {
            model,
            sentence,
            index: build_index(sentence),
            start,
            f,
        })
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    pub fn position_at(&self, state: StateId) -> FPosition {
        FPosition {
            state,
            node: self.sentence.root(),
            gamma_e: self.f,
            gamma_a: self.f,
        }
    }

    fn is_mu_label(&self, node: NodeId) -> bool {
        self.index
            .rf(node)
            .is_some_and(|b| matches!(self.sentence.kind(b), NodeKind::Mu(_)))
    }
}

impl Arena for FBoundedGame<'_> {
    type Pos = FPosition;

    fn initial(&self) -> FPosition {
        self.position_at(self.start)
    }

    fn status(&self, pos: &FPosition) -> GameStatus {
        if let Some(p) = basic_status(self.model, self.sentence, pos.state, pos.node) {
            return GameStatus::Won(p);
        }
        let owner = node_owner(self.sentence, &self.index, pos.node).expect("non-literal node");
        if let NodeKind::Label(_) = self.sentence.kind(pos.node) {
            let counter = if self.is_mu_label(pos.node) {
                pos.gamma_e
            } else {
                pos.gamma_a
            };
            if counter == 0 {
                return GameStatus::Won(owner.opponent());
            }
        }
        GameStatus::Turn(owner)
    }

    fn moves(&self, pos: &FPosition, mode: SolveMode) -> Vec<(Move, FPosition)> {
        if let GameStatus::Won(_) = self.status(pos) {
            return Vec::new();
        }
        let at = |state, node| FPosition {
            state,
            node,
            ..pos.clone()
        };
        let w = pos.state;
        let children = self.sentence.children(pos.node);
        match self.sentence.kind(pos.node) {
            NodeKind::Or | NodeKind::And => vec![(Move::Left, at(w, children[0])), (Move::Right, at(w, children[1]))],
            NodeKind::Diamond | NodeKind::Box => self
                .model
                .successors(w)
                .iter()
                .map(|&v| (Move::Successor(v), at(v, children[0])))
                .collect(),
            NodeKind::Mu(_) | NodeKind::Nu(_) => vec![(Move::Enter, at(w, children[0]))],
            NodeKind::Label(_) => {
                let body = self.sentence.body(self.index.rf(pos.node).expect("closed sentence"));
                let mu = self.is_mu_label(pos.node);
                let counter = if mu { pos.gamma_e } else { pos.gamma_a };
                let values: Vec<u64> = match mode {
                    SolveMode::Greedy => vec![counter - 1],
                    SolveMode::Exhaustive => (0..counter).rev().collect(),
                };
                values
                    .into_iter()
                    .map(|v| {
                        let mut next = at(w, body);
                        if mu {
                            next.gamma_e = v;
                        } else {
                            next.gamma_a = v;
                        }
                        (Move::Lower(v), next)
                    })
                    .collect()
            }
            NodeKind::Prop(_) | NodeKind::NegProp(_) => Vec::new(),
        }
    }

    fn view(&self, pos: &FPosition) -> PositionView {
        PositionView {
            state: self.model.name(pos.state).to_string(),
            node: self.sentence.path(pos.node),
            clocks: vec![
                ("gammaE".to_string(), pos.gamma_e.to_string()),
                ("gammaA".to_string(), pos.gamma_a.to_string()),
            ],
        }
    }

    fn describe_move(&self, mv: &Move) -> String {
        describe_basic_move(self.model, mv)
    }
}

#[derive(Clone, Debug)]
pub struct FSolution {
    pub verdict: Verdict,
    pub strategy: Strategy<FPosition>,
    pub visited: usize,
    pub f: u64,
}

/// Solves the f-bounded game with `f = card(M)^k * |φ|`.
///
/// Panics if the solver visits more than `card(M) * |φ| * (f+1)^2`
/// positions, which would mean counters are not being tracked correctly.
pub fn solve_fbounded(
    m: &KripkeModel,
    w: StateId,
    s: &Sentence,
    k: u32,
    mode: SolveMode,
) -> Result<FSolution, VariantError> {
    let game = FBoundedGame::new(m, s, w, k)?;
    let mut solver = Solver::new(&game, mode).with_cap(DEFAULT_CAP);
    let root = game.initial();
    let winner = solver.solve(&root)?;
    let strategy = extract_strategy(&mut solver, &root)?;
    let visited = solver.visited();
    let f = game.f();
    let limit = (m.card() as u128) * (s.size() as u128) * (f as u128 + 1).pow(2);
    assert!(
        visited as u128 <= limit,
        "f-bounded solver visited {visited} positions, above the bound {limit}"
    );
    Ok(FSolution {
        verdict: winner.into(),
        strategy,
        visited,
        f,
    })
}

/// Winning regions of the free game over all `(state, node)` positions.
#[derive(Clone, Debug)]
pub struct FreeRegions {
    size: usize,
    eloise: Vec<bool>,
    abelard: Vec<bool>,
}

impl FreeRegions {
    fn slot(&self, w: StateId, node: NodeId) -> usize {
        w * self.size + node.index()
    }

    pub fn verdict(&self, w: StateId, node: NodeId) -> Verdict {
        let i = self.slot(w, node);
        match (self.eloise[i], self.abelard[i]) {
            (true, false) => Verdict::Eloise,
            (false, true) => Verdict::Abelard,
            (false, false) => Verdict::Undetermined,
            (true, true) => unreachable!("winning regions overlap"),
        }
    }

    pub fn eloise_wins(&self, w: StateId, node: NodeId) -> bool {
        self.eloise[self.slot(w, node)]
    }

    pub fn abelard_wins(&self, w: StateId, node: NodeId) -> bool {
        self.abelard[self.slot(w, node)]
    }
}

/// Position graph of the free game: binders step to their body and labels
/// step to the body of their binder.
struct FreeGraph {
    owner: Vec<Option<Player>>,
    terminal: Vec<Option<Player>>,
    succ: Vec<Vec<usize>>,
}

fn free_graph(m: &KripkeModel, s: &Sentence, index: &SyntaxIndex) -> FreeGraph {
    let size = s.size();
    let total = m.card() * size;
    let mut g = FreeGraph {
        owner: vec![None; total],
        terminal: vec![None; total],
        succ: vec![Vec::new(); total],
    };
    for w in m.states() {
        for node in s.node_ids() {
            let i = w * size + node.index();
            if let Some(p) = basic_status(m, s, w, node) {
                g.terminal[i] = Some(p);
                continue;
            }
            g.owner[i] = node_owner(s, index, node);
            let children = s.children(node);
            g.succ[i] = match s.kind(node) {
                NodeKind::Or | NodeKind::And => vec![w * size + children[0].index(), w * size + children[1].index()],
                NodeKind::Diamond | NodeKind::Box => m
                    .successors(w)
                    .iter()
                    .map(|&v| v * size + children[0].index())
                    .collect(),
                NodeKind::Mu(_) | NodeKind::Nu(_) => vec![w * size + children[0].index()],
                NodeKind::Label(_) => {
                    let body = s.body(index.rf(node).expect("closed sentence"));
                    vec![w * size + body.index()]
                }
                NodeKind::Prop(_) | NodeKind::NegProp(_) => unreachable!(),
            };
        }
    }
    g
}

/// Attractor of `player` to the terminals that player wins.
fn attractor(g: &FreeGraph, player: Player) -> Vec<bool> {
    let n = g.succ.len();
    let mut preds = vec![Vec::new(); n];
    for (i, list) in g.succ.iter().enumerate() {
        for &j in list {
            preds[j].push(i);
        }
    }
    let mut remaining: Vec<usize> = g.succ.iter().map(Vec::len).collect();
    let mut inside = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| g.terminal[i] == Some(player)).collect();
    for &i in &queue {
        inside[i] = true;
    }
    while let Some(j) = queue.pop() {
        for &i in &preds[j] {
            if inside[i] {
                continue;
            }
            remaining[i] -= 1;
            if g.owner[i] == Some(player) || remaining[i] == 0 {
                inside[i] = true;
                queue.push(i);
            }
        }
    }
    inside
}

pub fn free_regions(m: &KripkeModel, s: &Sentence) -> Result<FreeRegions, GameError> {
    check_sentence(m, s, 0)?;
    let index = build_index(s);
    let g = free_graph(m, s, &index);
    Ok(FreeRegions {
        size: s.size(),
        eloise: attractor(&g, Player::Eloise),
        abelard: attractor(&g, Player::Abelard),
    })
}

/// Verdict of the free game from `(w, root)`.
pub fn solve_free(m: &KripkeModel, w: StateId, s: &Sentence) -> Result<Verdict, GameError> {
    check_sentence(m, s, w)?;
    Ok(free_regions(m, s)?.verdict(w, s.root()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::game::validate_strategy;
    use crate::kripke::{enumerate_models, load_model};

    fn m1() -> KripkeModel {
        load_model(br#"{"states":["a","b"],"edges":[["a","b"],["b","b"]],"val":{"p":["b"]}}"#).unwrap()
    }

    #[test]
    fn f_values() {
        let m = m1();
        let afp = parse("mu X. (p | []X)").unwrap();
        assert_eq!(f_value(&m, &afp, 1).unwrap(), 10);
        assert_eq!(f_value(&m, &afp, 2).unwrap(), 20);
        let one = KripkeModel::from_indices(1, [], []).unwrap();
        assert_eq!(f_value(&one, &parse("p").unwrap(), 1).unwrap(), 1);
        assert_eq!(f_value(&m, &afp, 0), Err(VariantError::ZeroExponent));
        assert_eq!(f_value(&m, &afp, 70), Err(VariantError::Overflow));
    }

    #[test]
    fn fbounded_examples() {
        let m = m1();
        let afp = parse("mu X. (p | []X)").unwrap();
        let sol = solve_fbounded(&m, 0, &afp, 1, SolveMode::Greedy).unwrap();
        assert_eq!(sol.verdict, Verdict::Eloise);
        let game = FBoundedGame::new(&m, &afp, 0, 1).unwrap();
        assert!(validate_strategy(&game, &sol.strategy, &game.initial()).unwrap());
        let mux = parse("mu X. X").unwrap();
        let nux = parse("nu X. X").unwrap();
        for w in 0..2 {
            for mode in [SolveMode::Greedy, SolveMode::Exhaustive] {
                assert_eq!(solve_fbounded(&m, w, &mux, 1, mode).unwrap().verdict, Verdict::Abelard);
                assert_eq!(solve_fbounded(&m, w, &nux, 1, mode).unwrap().verdict, Verdict::Eloise);
            }
        }
    }

    #[test]
    fn binders_pass_through() {
        let m = m1();
        let afp = parse("mu X. (p | []X)").unwrap();
        let game = FBoundedGame::new(&m, &afp, 0, 1).unwrap();
        let root = game.initial();
        let moves = game.moves(&root, SolveMode::Exhaustive);
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].0, Move::Enter);
        assert_eq!((moves[0].1.gamma_e, moves[0].1.gamma_a), (10, 10));
        let label = FPosition {
            state: 1,
            node: NodeId(4),
            gamma_e: 3,
            gamma_a: 10,
        };
        let lowered: Vec<Move> = game
            .moves(&label, SolveMode::Exhaustive)
            .into_iter()
            .map(|m| m.0)
            .collect();
        assert_eq!(lowered, vec![Move::Lower(2), Move::Lower(1), Move::Lower(0)]);
        let zero = FPosition { gamma_e: 0, ..label };
        assert_eq!(game.status(&zero), GameStatus::Won(Player::Abelard));
    }

    #[test]
    fn decrement_one_matches_exhaustive_on_small_models() {
        let sentences = [
            "mu X. (p | []X)",
            "nu X. (p & <>X)",
            "nu X. [] mu Y. (<>Y | (p & X))",
            "mu X. (<>X | (p & []X))",
        ];
        for m in enumerate_models(2, &["p"]).step_by(3) {
            for text in sentences {
                let s = parse(text).unwrap();
                for w in m.states() {
                    let g = solve_fbounded(&m, w, &s, 1, SolveMode::Greedy).unwrap().verdict;
                    let e = solve_fbounded(&m, w, &s, 1, SolveMode::Exhaustive).unwrap().verdict;
                    assert_eq!(g, e, "{text} at {w} on {m:?}");
                }
            }
        }
    }

    #[test]
    fn free_examples() {
        let m = m1();
        assert_eq!(
            solve_free(&m, 0, &parse("mu X. X").unwrap()).unwrap(),
            Verdict::Undetermined
        );
        assert_eq!(solve_free(&m, 1, &parse("p").unwrap()).unwrap(), Verdict::Eloise);
        assert_eq!(solve_free(&m, 0, &parse("p").unwrap()).unwrap(), Verdict::Abelard);
        assert_eq!(
            solve_free(&m, 0, &parse("mu X. (p | []X)").unwrap()).unwrap(),
            Verdict::Eloise
        );
        let g = parse("nu X. (!p | []X)").unwrap();
        assert_eq!(solve_free(&m, 0, &g).unwrap(), Verdict::Eloise);
        // at b the only sensible play loops on b forever
        assert_eq!(solve_free(&m, 1, &g).unwrap(), Verdict::Undetermined);
    }

    #[test]
    fn free_regions_are_closed() {
        let s = parse("nu X. [] mu Y. (<>Y | (p & X))").unwrap();
        let index = build_index(&s);
        for m in enumerate_models(2, &["p"]) {
            let g = free_graph(&m, &s, &index);
            let r = free_regions(&m, &s).unwrap();
            for w in m.states() {
                for node in s.node_ids() {
                    let i = w * s.size() + node.index();
                    assert!(!(r.eloise_wins(w, node) && r.abelard_wins(w, node)));
                    for (player, region) in [(Player::Eloise, &r.eloise), (Player::Abelard, &r.abelard)] {
                        if g.terminal[i].is_some() || region[i] {
                            continue;
                        }
                        let hits = g.succ[i].iter().filter(|&&j| region[j]).count();
                        let forced = if g.owner[i] == Some(player) {
                            hits > 0
                        } else {
                            hits == g.succ[i].len()
                        };
                        assert!(!forced, "attractor not closed at {i}");
                    }
                }
            }
        }
    }
}
