//! Alternating reachability and the reductions of (bounded) model checking
//! to it.
//!
//! In the reachability game player B moves at `q_B` states and player A
//! everywhere else. B wins on reaching a `p_B` state, a stuck player loses,
//! and infinite plays go to A.

use std::collections::{BTreeMap, HashMap};

use serde_json::json;
use thiserror::Error;

use crate::formula::{parse, Sentence};
use crate::game::{
    explore, Arena, BoundedGame, GameError, GameStatus, Player, Position, PositionGraph, PositionView, SolveMode,
    DEFAULT_CAP,
};
use crate::kripke::{KripkeModel, StateId, StateSet};
use crate::semantics::Bound;

pub const P_B: &str = "p_B";
pub const Q_B: &str = "q_B";

const CHI: &str = "mu X. (p_B | (q_B & <> X) | (!q_B & [] X))";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("proposition {0:?} is outside the reachability vocabulary {{p_B, q_B}}")]
    Vocabulary(String),
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The sentence defining B's winning region.
pub fn chi() -> Sentence {
    parse(CHI).expect("chi is well formed")
}

pub fn check_vocabulary(m: &KripkeModel) -> Result<(), ReductionError> {
    match m.propositions().find(|p| *p != P_B && *p != Q_B) {
        Some(p) => Err(ReductionError::Vocabulary(p.to_string())),
        None => Ok(()),
    }
}

/// B's winning region: the least set containing the `p_B` states, the
/// `q_B` states with a successor inside, and the other states whose
/// successors all lie inside (vacuously so for dead ends).
pub fn ar_winning_region(m: &KripkeModel) -> Result<StateSet, ReductionError> {
    check_vocabulary(m)?;
    let p = m.valuation(P_B);
    let q = m.valuation(Q_B);
    let win = attractor_b(m.card(), |w| m.successors(w), |w| p.contains(w), |w| q.contains(w));
    Ok(StateSet::from_states(m.card(), (0..m.card()).filter(|&w| win[w])))
}

fn attractor_b<'s>(
    n: usize,
    succ: impl Fn(usize) -> &'s [usize],
    p: impl Fn(usize) -> bool,
    q: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let mut preds = vec![Vec::new(); n];
    for w in 0..n {
        for &v in succ(w) {
            preds[v].push(w);
        }
    }
    let mut remaining: Vec<usize> = (0..n).map(|w| succ(w).len()).collect();
    let mut win = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&w| p(w) || (!q(w) && succ(w).is_empty())).collect();
    for &w in &queue {
        win[w] = true;
    }
    while let Some(v) = queue.pop() {
        for &w in &preds[v] {
            if win[w] {
                continue;
            }
            remaining[w] -= 1;
            if q(w) || remaining[w] == 0 {
                win[w] = true;
                queue.push(w);
            }
        }
    }
    win
}

/// Whether B wins the reachability game from `w`.
pub fn solve_ar(m: &KripkeModel, w: StateId) -> Result<bool, ReductionError> {
    if w >= m.card() {
        return Err(ReductionError::UnknownState(w));
    }
    Ok(ar_winning_region(m)?.contains(w))
}

/// A reachability model built from a game's positions.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub model: KripkeModel,
    pub root: StateId,
    /// Per reduced state: the originating game position.
    pub backmap: Vec<PositionView>,
}

impl ReducedModel {
    /// Model JSON plus `root` and `backmap` keys.
    pub fn to_json(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self.model.to_file()).expect("model serialization");
        let backmap: BTreeMap<&str, serde_json::Value> = self
            .backmap
            .iter()
            .enumerate()
            .map(|(i, view)| {
                let clocks: BTreeMap<&str, &str> = view.clocks.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                (
                    self.model.name(i),
                    json!({"state": view.state, "node": view.node, "clocks": clocks}),
                )
            })
            .collect();
        value["root"] = json!(self.model.name(self.root));
        value["backmap"] = json!(backmap);
        value
    }

    pub fn len(&self) -> usize {
        self.model.card()
    }

    pub fn is_empty(&self) -> bool {
        self.model.card() == 0
    }

    pub fn solve(&self) -> bool {
        solve_ar(&self.model, self.root).expect("reduced models use the reachability vocabulary")
    }
}

fn position_name(game: &BoundedGame<'_>, pos: &Position) -> String {
    let view = game.view(pos);
    let clocks: Vec<String> = view.clocks.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}|{}|{}", view.state, view.node, clocks.join(","))
}

/// `(p_B, q_B)` for a position: B plays Eloise, A plays Abelard.
fn position_props(game: &BoundedGame<'_>, status: GameStatus, pos: &Position) -> (bool, bool) {
    let literal = game.sentence().kind(pos.node).is_literal();
    match status {
        GameStatus::Won(Player::Eloise) => (literal, false),
        GameStatus::Won(Player::Abelard) => (false, true),
        GameStatus::Turn(Player::Eloise) => (false, true),
        GameStatus::Turn(Player::Abelard) => (false, false),
    }
}

fn assemble(
    names: Vec<String>,
    edges: Vec<(StateId, StateId)>,
    props: Vec<(bool, bool)>,
    backmap: Vec<PositionView>,
) -> ReducedModel {
    let n = names.len();
    let p = StateSet::from_states(n, (0..n).filter(|&i| props[i].0));
    let q = StateSet::from_states(n, (0..n).filter(|&i| props[i].1));
    let model = KripkeModel::from_named_indices(names, edges, [(P_B.to_string(), p), (Q_B.to_string(), q)])
        .expect("position names are unique");
    ReducedModel {
        model,
        root: 0,
        backmap,
    }
}

/// The reachable position graph of the bounded game as a
/// reachability model, with shared positions merged.
pub fn build_position_model(
    m: &KripkeModel,
    w: StateId,
    s: &Sentence,
    bound: Bound,
) -> Result<ReducedModel, ReductionError> {
    build_position_model_with_cap(m, w, s, bound, DEFAULT_CAP)
}

pub fn build_position_model_with_cap(
    m: &KripkeModel,
    w: StateId,
    s: &Sentence,
    bound: Bound,
    cap: usize,
) -> Result<ReducedModel, ReductionError> {
    Ok(PositionReduction::new(m, w, s, bound, cap)?.to_model())
}

/// The explored position graph of a bounded game together with its
/// reachability valuation. Index 0 is the initial position.
pub struct PositionReduction<'a> {
    game: BoundedGame<'a>,
    pub graph: PositionGraph<Position>,
    /// `(p_B, q_B)` per position.
    pub props: Vec<(bool, bool)>,
}

impl<'a> PositionReduction<'a> {
    pub fn new(
        m: &'a KripkeModel,
        w: StateId,
        s: &'a Sentence,
        bound: Bound,
        cap: usize,
    ) -> Result<PositionReduction<'a>, ReductionError> {
        let game = BoundedGame::new(m, s, w, bound)?;
        let graph = explore(&game, SolveMode::Exhaustive, cap)?;
        let props = graph
            .positions
            .iter()
            .zip(&graph.status)
            .map(|(p, st)| position_props(&game, *st, p))
            .collect();
        Ok(PositionReduction { game, graph, props })
    }

    pub fn game(&self) -> &BoundedGame<'a> {
        &self.game
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn is_acyclic(&self) -> bool {
        self.graph.is_acyclic()
    }

    /// Whether B wins the reachability game from the initial position.
    pub fn verdict(&self) -> bool {
        let succ: Vec<Vec<usize>> = self
            .graph
            .succ
            .iter()
            .map(|l| l.iter().map(|(_, j)| *j).collect())
            .collect();
        let win = attractor_b(succ.len(), |i| &succ[i], |i| self.props[i].0, |i| self.props[i].1);
        win[0]
    }

    pub fn to_model(&self) -> ReducedModel {
        let names = self
            .graph
            .positions
            .iter()
            .map(|p| position_name(&self.game, p))
            .collect();
        let edges = self
            .graph
            .succ
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |(_, j)| (i, *j)))
            .collect();
        let backmap = self.graph.positions.iter().map(|p| self.game.view(p)).collect();
        assemble(names, edges, self.props.clone(), backmap)
    }
}

/// Like [`build_position_model`] but unfolds the position DAG into a tree.
/// Tree nodes are named `position#k`.
pub fn build_position_tree(
    m: &KripkeModel,
    w: StateId,
    s: &Sentence,
    bound: Bound,
    cap: usize,
) -> Result<ReducedModel, ReductionError> {
    let game = BoundedGame::new(m, s, w, bound)?;
    let graph = explore(&game, SolveMode::Exhaustive, cap)?;
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let mut props = Vec::new();
    let mut backmap = Vec::new();
    let mut copies: HashMap<usize, usize> = HashMap::new();
    // (graph index, parent tree node)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(0, None)];
    while let Some((g, parent)) = stack.pop() {
        if names.len() >= cap {
            return Err(GameError::ResourceLimit(cap).into());
        }
        let t = names.len();
        let k = copies.entry(g).or_insert(0);
        let pos = &graph.positions[g];
        names.push(format!("{}#{}", position_name(&game, pos), k));
        *k += 1;
        props.push(position_props(&game, graph.status[g], pos));
        backmap.push(game.view(pos));
        if let Some(p) = parent {
            edges.push((p, t));
        }
        for (_, j) in graph.succ[g].iter().rev() {
            stack.push((*j, Some(t)));
        }
    }
    Ok(assemble(names, edges, props, backmap))
}

/// The position model at the bound `max(1, card(M))`, which
/// decides standard truth on finite models.
pub fn reduce_mc(m: &KripkeModel, w: StateId, s: &Sentence) -> Result<ReducedModel, ReductionError> {
    build_position_model(m, w, s, Bound::Finite(Bound::Omega.effective(m.card())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::solve;
    use crate::kripke::load_model;
    use crate::semantics::truth_set;

    fn m1() -> KripkeModel {
        load_model(br#"{"states":["a","b"],"edges":[["a","b"],["b","b"]],"val":{"p":["b"]}}"#).unwrap()
    }

    fn ar(states: usize, edges: &[(usize, usize)], p: &[usize], q: &[usize]) -> KripkeModel {
        KripkeModel::from_indices(
            states,
            edges.iter().copied(),
            [
                (P_B.to_string(), StateSet::from_states(states, p.iter().copied())),
                (Q_B.to_string(), StateSet::from_states(states, q.iter().copied())),
            ],
        )
        .unwrap()
    }

    #[test]
    fn chi_shape() {
        let c = chi();
        assert_eq!(c.size(), 12);
        assert_eq!(parse(&c.render()).unwrap(), c);
        assert_eq!(c.dual().render(), "nu X. ((!p_B & (!q_B | ([] X))) & (q_B | (<> X)))");
    }

    #[test]
    fn ar_examples() {
        assert!(solve_ar(&ar(2, &[(0, 1)], &[1], &[0]), 0).unwrap());
        assert!(!solve_ar(&ar(1, &[(0, 0)], &[], &[]), 0).unwrap());
        assert!(solve_ar(&ar(1, &[], &[], &[]), 0).unwrap());
        assert!(!solve_ar(&ar(1, &[], &[], &[0]), 0).unwrap());
        // A escapes through the second edge
        assert!(!solve_ar(&ar(3, &[(0, 1), (0, 2), (2, 2)], &[1], &[]), 0).unwrap());
    }

    #[test]
    fn vocabulary_is_checked() {
        assert_eq!(solve_ar(&m1(), 0), Err(ReductionError::Vocabulary("p".into())));
        let bare = KripkeModel::from_indices(1, [(0, 0)], []).unwrap();
        assert!(!solve_ar(&bare, 0).unwrap());
    }

    #[test]
    fn chi_defines_winning_region() {
        let c = chi();
        let m = ar(3, &[(0, 1), (0, 2), (1, 1), (2, 0)], &[], &[0]);
        assert_eq!(truth_set(&m, &c).unwrap(), ar_winning_region(&m).unwrap());
    }

    #[test]
    fn position_model_examples() {
        let m = m1();
        let p = parse("p").unwrap();
        let at_a = build_position_model(&m, 0, &p, Bound::Finite(1)).unwrap();
        assert_eq!(at_a.len(), 1);
        assert!(at_a.model.holds(Q_B, 0) && !at_a.model.holds(P_B, 0));
        assert!(!at_a.solve());
        let at_b = build_position_model(&m, 1, &p, Bound::Finite(1)).unwrap();
        assert!(at_b.model.holds(P_B, 0) && at_b.solve());

        let afp = parse("mu X. (p | []X)").unwrap();
        let j = build_position_model(&m, 0, &afp, Bound::Finite(2)).unwrap();
        assert_eq!(j.model.name(j.root), "a|/|");
        assert!(j.solve());
        let game = BoundedGame::new(&m, &afp, 0, Bound::Finite(2)).unwrap();
        assert_eq!(solve(&game, SolveMode::Exhaustive).unwrap().winner, Player::Eloise);
        assert!(!build_position_model(&m, 0, &afp, Bound::Finite(1)).unwrap().solve());
        assert!(m.names().iter().all(|n| !n.contains('|')));
        assert!(j.model.names().contains(&"a|/0|X=1".to_string()));
    }

    #[test]
    fn reduce_mc_examples() {
        let m = m1();
        assert!(reduce_mc(&m, 0, &parse("mu X. (p | []X)").unwrap()).unwrap().solve());
        assert!(!reduce_mc(&m, 0, &parse("mu X. X").unwrap()).unwrap().solve());
    }

    #[test]
    fn tree_matches_dag() {
        let m = m1();
        let s = parse("nu X. [] mu Y. (<>Y | (p & X))").unwrap();
        for w in 0..2 {
            let dag = build_position_model(&m, w, &s, Bound::Finite(2)).unwrap();
            let tree = build_position_tree(&m, w, &s, Bound::Finite(2), 100_000).unwrap();
            assert!(tree.len() >= dag.len());
            assert_eq!(tree.model.edge_count() + 1, tree.len());
            assert_eq!(tree.solve(), dag.solve());
            let r = PositionReduction::new(&m, w, &s, Bound::Finite(2), 100_000).unwrap();
            assert!(r.is_acyclic());
            assert_eq!(r.verdict(), dag.solve());
        }
    }

    #[test]
    fn json_export_loads_back() {
        let m = m1();
        let afp = parse("mu X. (p | []X)").unwrap();
        let j = build_position_model(&m, 0, &afp, Bound::Finite(2)).unwrap();
        let value = j.to_json();
        assert_eq!(value["root"], "a|/|");
        assert_eq!(value["backmap"]["a|/0|X=1"]["clocks"]["X"], "1");
        let back = crate::kripke::load_model(value.to_string().as_bytes()).unwrap();
        assert_eq!(back.card(), j.len());
        assert_eq!(solve_ar(&back, 0).unwrap(), j.solve());
    }
}
