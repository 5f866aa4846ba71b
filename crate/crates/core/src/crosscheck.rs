//! Cross-engine agreement checks with counterexample minimization.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::formula::{Formula, NodeId, NodeKind, Sentence};
use crate::game::{BoundedGame, ClockRepr, GameError, Player, SolveMode, Solver};
use crate::kripke::{KripkeModel, StateId, StateSet};
use crate::reduction::{reduce_mc, PositionReduction, ReductionError};
use crate::semantics::{bounded_truth_set, truth_set, Bound, EvalError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Check {
    /// Game winner vs bounded compositional truth, per listed bound.
    GameVsBounded,
    /// Bounded truth at `card(M)` vs standard truth.
    CardCollapse,
    /// Omega-bounded compositional and game truth vs standard truth.
    OmegaVsStandard,
    /// Reachability verdict of the position model vs game winner.
    PositionModel,
    /// Reachability verdict of the position model at `card(M)` vs standard truth.
    McReduction,
    /// Greedy vs exhaustive clock choices.
    GreedyVsExhaustive,
    /// Canonical vs full clock maps.
    CanonicalVsFull,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::GameVsBounded,
        Check::CardCollapse,
        Check::OmegaVsStandard,
        Check::PositionModel,
        Check::McReduction,
        Check::GreedyVsExhaustive,
        Check::CanonicalVsFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::GameVsBounded => "game-vs-bounded",
            Check::CardCollapse => "card-collapse",
            Check::OmegaVsStandard => "omega-vs-standard",
            Check::PositionModel => "position-model",
            Check::McReduction => "mc-reduction",
            Check::GreedyVsExhaustive => "greedy-vs-exhaustive",
            Check::CanonicalVsFull => "canonical-vs-full",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The compositional bounded engine under test. Swappable so the harness
/// can be checked against a deliberately wrong implementation.
pub type BoundedEngine = fn(&KripkeModel, &Sentence, Bound) -> Result<StateSet, EvalError>;

/// Off by one: uses one approximant step fewer than asked.
pub fn broken_bounded(m: &KripkeModel, s: &Sentence, bound: Bound) -> Result<StateSet, EvalError> {
    let steps = bound.effective(m.card());
    bounded_truth_set(m, s, Bound::Finite(steps.saturating_sub(1).max(1)))
}

#[derive(Clone, Debug)]
pub struct Config {
    pub gammas: Vec<Bound>,
    pub checks: Vec<Check>,
    pub bounded: BoundedEngine,
    /// Position cap for every solver and reduction.
    pub cap: usize,
    /// Largest finite bound for the full-clock-map comparison.
    pub full_clock_max: u32,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            gammas: vec![Bound::Finite(1), Bound::Finite(2), Bound::Omega],
            checks: Check::ALL.to_vec(),
            bounded: bounded_truth_set,
            cap: 1_000_000,
            full_clock_max: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub check: Check,
    pub model: KripkeModel,
    pub sentence: Sentence,
    pub bound: Option<Bound>,
    pub state: StateId,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check:    {}", self.check)?;
        writeln!(f, "model:    {}", self.model.to_json())?;
        writeln!(f, "formula:  {}", self.sentence)?;
        match self.bound {
            Some(b) => writeln!(f, "bound:    {b}")?,
            None => writeln!(f, "bound:    -")?,
        }
        writeln!(f, "position: ({}, /)", self.model.name(self.state))?;
        write!(f, "detail:   {}", self.detail)
    }
}

#[derive(Debug)]
pub enum HarnessError {
    Game(GameError),
    Eval(EvalError),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Game(e) => e.fmt(f),
            HarnessError::Eval(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<GameError> for HarnessError {
    fn from(e: GameError) -> HarnessError {
        HarnessError::Game(e)
    }
}

impl From<EvalError> for HarnessError {
    fn from(e: EvalError) -> HarnessError {
        HarnessError::Eval(e)
    }
}

impl From<ReductionError> for HarnessError {
    fn from(e: ReductionError) -> HarnessError {
        match e {
            ReductionError::Game(g) => HarnessError::Game(g),
            other => HarnessError::Game(GameError::Io(other.to_string())),
        }
    }
}

/// Tallies of checked comparisons and failures per check.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checked: BTreeMap<Check, u64>,
    pub failed: BTreeMap<Check, u64>,
    pub first_failure: BTreeMap<Check, Counterexample>,
}

impl Report {
    pub fn merge(&mut self, other: Report) {
        for (k, v) in other.checked {
            *self.checked.entry(k).or_default() += v;
        }
        for (k, v) in other.failed {
            *self.failed.entry(k).or_default() += v;
        }
        for (k, v) in other.first_failure {
            self.first_failure.entry(k).or_insert(v);
        }
    }

    pub fn all_agree(&self) -> bool {
        self.failed.values().all(|&v| v == 0)
    }

    fn tick(&mut self, check: Check) {
        *self.checked.entry(check).or_default() += 1;
    }

    fn fail(&mut self, cx: Counterexample) {
        *self.failed.entry(cx.check).or_default() += 1;
        self.first_failure.entry(cx.check).or_insert(cx);
    }

    /// One line per check: `name checked failed PASS|FAIL`.
    pub fn matrix(&self) -> String {
        let mut out = String::new();
        for (check, n) in &self.checked {
            let bad = self.failed.get(check).copied().unwrap_or(0);
            let tag = if bad == 0 { "PASS" } else { "FAIL" };
            out.push_str(&format!("{:<22} {:>10} {:>8}  {tag}\n", check.name(), n, bad));
        }
        out
    }
}

fn game_winners(
    m: &KripkeModel,
    s: &Sentence,
    bound: Bound,
    mode: SolveMode,
    repr: ClockRepr,
    cap: usize,
) -> Result<Vec<bool>, HarnessError> {
    let game = BoundedGame::new(m, s, 0, bound)?.with_repr(repr);
    let mut solver = Solver::new(&game, mode).with_cap(cap);
    m.states()
        .map(|w| Ok(solver.solve(&game.position_at(w))? == Player::Eloise))
        .collect()
}

/// Runs the configured checks on one (model, sentence) pair, all states.
pub fn check_pair(cfg: &Config, m: &KripkeModel, s: &Sentence) -> Result<Report, HarnessError> {
    let mut report = Report::default();
    let want = |c: Check| cfg.checks.contains(&c);
    let standard = truth_set(m, s)?;
    let cx = |check: Check, bound: Option<Bound>, w: StateId, detail: String| Counterexample {
        check,
        model: m.clone(),
        sentence: s.clone(),
        bound,
        state: w,
        detail,
    };

    if want(Check::CardCollapse) {
        let collapsed = (cfg.bounded)(m, s, Bound::Finite(m.card() as u32))?;
        for w in m.states() {
            report.tick(Check::CardCollapse);
            if collapsed.contains(w) != standard.contains(w) {
                let detail = format!(
                    "bounded:{} says {}, standard says {}",
                    m.card(),
                    collapsed.contains(w),
                    standard.contains(w)
                );
                report.fail(cx(Check::CardCollapse, Some(Bound::Finite(m.card() as u32)), w, detail));
            }
        }
    }
    if want(Check::McReduction) {
        for w in m.states() {
            report.tick(Check::McReduction);
            let reduced = reduce_mc(m, w, s)?.solve();
            if reduced != standard.contains(w) {
                let detail = format!("reduction says {reduced}, standard says {}", standard.contains(w));
                report.fail(cx(Check::McReduction, None, w, detail));
            }
        }
    }

    for &bound in &cfg.gammas {
        let needs_game = want(Check::GameVsBounded)
            || want(Check::PositionModel)
            || want(Check::GreedyVsExhaustive)
            || (bound == Bound::Omega && want(Check::OmegaVsStandard));
        if !needs_game && !want(Check::CanonicalVsFull) {
            continue;
        }
        let greedy = game_winners(m, s, bound, SolveMode::Greedy, ClockRepr::Canonical, cfg.cap)?;
        let compositional = (cfg.bounded)(m, s, bound)?;
        for w in m.states() {
            if want(Check::GameVsBounded) {
                report.tick(Check::GameVsBounded);
                if greedy[w] != compositional.contains(w) {
                    let detail = format!(
                        "game says {}, compositional says {}",
                        greedy[w],
                        compositional.contains(w)
                    );
                    report.fail(cx(Check::GameVsBounded, Some(bound), w, detail));
                }
            }
            if bound == Bound::Omega && want(Check::OmegaVsStandard) {
                report.tick(Check::OmegaVsStandard);
                if greedy[w] != standard.contains(w) || compositional.contains(w) != standard.contains(w) {
                    let detail = format!(
                        "game says {}, compositional says {}, standard says {}",
                        greedy[w],
                        compositional.contains(w),
                        standard.contains(w)
                    );
                    report.fail(cx(Check::OmegaVsStandard, Some(bound), w, detail));
                }
            }
            if want(Check::PositionModel) {
                report.tick(Check::PositionModel);
                let ar = PositionReduction::new(m, w, s, bound, cfg.cap)?.verdict();
                if ar != greedy[w] {
                    report.fail(cx(
                        Check::PositionModel,
                        Some(bound),
                        w,
                        format!("reduction says {ar}, game says {}", greedy[w]),
                    ));
                }
            }
        }
        if want(Check::GreedyVsExhaustive) {
            let exhaustive = game_winners(m, s, bound, SolveMode::Exhaustive, ClockRepr::Canonical, cfg.cap)?;
            for w in m.states() {
                report.tick(Check::GreedyVsExhaustive);
                if exhaustive[w] != greedy[w] {
                    let detail = format!("greedy says {}, exhaustive says {}", greedy[w], exhaustive[w]);
                    report.fail(cx(Check::GreedyVsExhaustive, Some(bound), w, detail));
                }
            }
        }
        let small = match bound {
            Bound::Finite(n) => n <= cfg.full_clock_max,
            Bound::Omega => false,
        };
        if want(Check::CanonicalVsFull) && small {
            let full = game_winners(m, s, bound, SolveMode::Exhaustive, ClockRepr::Full, cfg.cap)?;
            for w in m.states() {
                report.tick(Check::CanonicalVsFull);
                if full[w] != greedy[w] {
                    let detail = format!("canonical says {}, full says {}", greedy[w], full[w]);
                    report.fail(cx(Check::CanonicalVsFull, Some(bound), w, detail));
                }
            }
        }
    }
    Ok(report)
}

/// Whether `check` fails on the instance, for any state.
fn still_fails(
    cfg: &Config,
    check: Check,
    m: &KripkeModel,
    s: &Sentence,
    bound: Option<Bound>,
) -> Option<Counterexample> {
    let cfg = Config {
        gammas: bound.into_iter().collect(),
        checks: vec![check],
        ..cfg.clone()
    };
    let report = check_pair(&cfg, m, s).ok()?;
    report.first_failure.get(&check).cloned()
}

/// Greedily shrinks a counterexample: smaller formula, fewer states, edges
/// and valuation entries, smaller bound. Every step keeps the failure.
pub fn minimize(cfg: &Config, cx: &Counterexample) -> Counterexample {
    let mut best = cx.clone();
    loop {
        let mut improved = false;
        for (m, s, bound) in shrink_candidates(&best) {
            if let Some(found) = still_fails(cfg, best.check, &m, &s, bound) {
                best = found;
                improved = true;
                break;
            }
        }
        if !improved {
            return best;
        }
    }
}

fn shrink_candidates(cx: &Counterexample) -> Vec<(KripkeModel, Sentence, Option<Bound>)> {
    let mut out = Vec::new();
    for s in shrink_sentence(&cx.sentence) {
        out.push((cx.model.clone(), s, cx.bound));
    }
    for m in shrink_model(&cx.model) {
        out.push((m, cx.sentence.clone(), cx.bound));
    }
    if let Some(Bound::Finite(n)) = cx.bound {
        if n > 1 {
            out.push((cx.model.clone(), cx.sentence.clone(), Some(Bound::Finite(n - 1))));
        }
    }
    out
}

fn replace_at(s: &Sentence, id: NodeId, target: NodeId, with: &Formula) -> Formula {
    if id == target {
        return with.clone();
    }
    let node = s.node(id);
    let child = |i: usize| Box::new(replace_at(s, node.children[i], target, with));
    match &node.kind {
        NodeKind::Prop(_) | NodeKind::NegProp(_) | NodeKind::Label(_) => s.formula_at(id),
        NodeKind::Or => Formula::Or(child(0), child(1)),
        NodeKind::And => Formula::And(child(0), child(1)),
        NodeKind::Diamond => Formula::Diamond(child(0)),
        NodeKind::Box => Formula::Box(child(0)),
        NodeKind::Mu(x) => Formula::Mu(x.clone(), child(0)),
        NodeKind::Nu(x) => Formula::Nu(x.clone(), child(0)),
    }
}

/// Sentences obtained by replacing one subformula with one of its children
/// or with a literal; only closed results are kept.
fn shrink_sentence(s: &Sentence) -> Vec<Sentence> {
    let mut literals: Vec<Formula> = Vec::new();
    for p in s.propositions() {
        literals.push(Formula::Prop(p.clone()));
        literals.push(Formula::NegProp(p));
    }
    let mut out = Vec::new();
    for id in s.node_ids() {
        let mut replacements: Vec<Formula> = s.children(id).iter().map(|&c| s.formula_at(c)).collect();
        if !s.kind(id).is_literal() {
            replacements.extend(literals.iter().cloned());
        }
        for r in replacements {
            if let Ok(candidate) = Sentence::from_formula(&replace_at(s, s.root(), id, &r)) {
                if candidate.size() < s.size() {
                    out.push(candidate.normalize());
                }
            }
        }
    }
    out
}

fn shrink_model(m: &KripkeModel) -> Vec<KripkeModel> {
    let n = m.card();
    let edges: Vec<(StateId, StateId)> = m
        .states()
        .flat_map(|w| m.successors(w).iter().map(move |&v| (w, v)))
        .collect();
    let val: Vec<(String, StateSet)> = m.propositions().map(|p| (p.to_string(), m.valuation(p))).collect();
    let mut out = Vec::new();
    if n > 1 {
        for gone in 0..n {
            let keep = |w: StateId| if w < gone { w } else { w - 1 };
            let names = m
                .names()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != gone)
                .map(|(_, s)| s.clone())
                .collect();
            let e = edges
                .iter()
                .filter(|(a, b)| *a != gone && *b != gone)
                .map(|&(a, b)| (keep(a), keep(b)));
            let v = val.iter().map(|(p, set)| {
                (
                    p.clone(),
                    StateSet::from_states(n - 1, set.iter().filter(|&w| w != gone).map(keep)),
                )
            });
            out.push(KripkeModel::from_named_indices(names, e, v.collect::<Vec<_>>()).expect("valid submodel"));
        }
    }
    for skip in 0..edges.len() {
        let e = edges.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &e)| e);
        out.push(KripkeModel::from_named_indices(m.names().to_vec(), e, val.clone()).expect("valid submodel"));
    }
    for (k, (_, set)) in val.iter().enumerate() {
        for w in set.iter() {
            let mut v = val.clone();
            v[k].1.remove(w);
            out.push(KripkeModel::from_named_indices(m.names().to_vec(), edges.clone(), v).expect("valid submodel"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::load_model;

    #[test]
    fn reference_engines_agree_on_m1() {
        let m = load_model(br#"{"states":["a","b"],"edges":[["a","b"],["b","b"]],"val":{"p":["b"]}}"#).unwrap();
        let cfg = Config::default();
        for text in ["mu X. (p | []X)", "nu X. [] mu Y. (<>Y | (p & X))", "mu X. X"] {
            let report = check_pair(&cfg, &m, &parse(text).unwrap()).unwrap();
            assert!(report.all_agree(), "{}", report.matrix());
            assert_eq!(report.checked.len(), Check::ALL.len());
        }
    }

    #[test]
    fn broken_engine_is_caught_and_minimized() {
        let m = load_model(
            br#"{"states":["a","b","c"],"edges":[["a","b"],["b","c"],["c","c"]],"val":{"p":["c"],"q":["a"]}}"#,
        )
        .unwrap();
        let cfg = Config {
            bounded: broken_bounded,
            ..Config::default()
        };
        let s = parse("(q | p) & mu X. (p | []X)").unwrap();
        let report = check_pair(&cfg, &m, &s).unwrap();
        assert!(!report.all_agree());
        let cx = report.first_failure.values().next().unwrap();
        let small = minimize(&cfg, cx);
        assert!(small.sentence.size() <= cx.sentence.size());
        assert!(small.model.card() <= 2, "{small}");
        assert!(still_fails(&cfg, small.check, &small.model, &small.sentence, small.bound).is_some());
    }
}
