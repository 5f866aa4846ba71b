//! Compositional engines: the standard fixed-point semantics and the
//! bounded semantics built from ordinal approximants.
//!
//! Both engines resolve labels by name through an [`Assignment`], so they
//! work on open formulas and on sentences that are not in normal form.
//! Fixed points are computed by plain Kleene iteration.

use std::fmt;

use thiserror::Error;

use crate::formula::{NodeId, NodeKind, Sentence};
use crate::kripke::{Assignment, KripkeModel, StateSet};

/// Clock value bound. `Finite(n)` requires `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite(u32),
    Omega,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("label {0} is free in the evaluated formula and has no value in the assignment")]
    UnboundLabel(String),
    #[error("clock bound must be at least 1")]
    ZeroBound,
    #[error("node {0} is not a mu/nu binder")]
    NotABinder(NodeId),
}

impl Bound {
    pub fn finite(n: u32) -> Result<Bound, EvalError> {
        if n == 0 {
            Err(EvalError::ZeroBound)
        } else {
            Ok(Bound::Finite(n))
        }
    }

    /// The finite bound that stands in for this one on a model with `card`
    /// states. On a finite model every approximant chain stabilizes within
    /// `card` steps, so `Omega` behaves exactly like `Finite(max(1, card))`.
    pub fn effective(self, card: usize) -> u32 {
        match self {
            Bound::Finite(n) => n,
            Bound::Omega => card.max(1) as u32,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(n) => write!(f, "{n}"),
            Bound::Omega => f.write_str("omega"),
        }
    }
}

#[derive(Clone, Copy)]
enum Iteration {
    /// Iterate until the chain stabilizes.
    Fixpoint,
    /// Iterate exactly this many times (chains may stabilize earlier).
    Steps(u32),
}

struct Evaluator<'a> {
    model: &'a KripkeModel,
    sentence: &'a Sentence,
    mode: Iteration,
}

impl Evaluator<'_> {
    fn eval(&self, env: &mut Assignment, id: NodeId) -> Result<StateSet, EvalError> {
        let m = self.model;
        let n = m.card();
        let node = self.sentence.node(id);
        Ok(match &node.kind {
            NodeKind::Prop(p) => m.valuation(p),
            NodeKind::NegProp(p) => m.valuation(p).complement(),
            NodeKind::Label(x) => env.get(x).cloned().ok_or_else(|| EvalError::UnboundLabel(x.clone()))?,
            NodeKind::Or => {
                let a = self.eval(env, node.children[0])?;
                a.union(&self.eval(env, node.children[1])?)
            }
            NodeKind::And => {
                let a = self.eval(env, node.children[0])?;
                a.intersection(&self.eval(env, node.children[1])?)
            }
            NodeKind::Diamond => {
                let a = self.eval(env, node.children[0])?;
                StateSet::from_states(
                    n,
                    m.states().filter(|&w| m.successors(w).iter().any(|&v| a.contains(v))),
                )
            }
            NodeKind::Box => {
                let a = self.eval(env, node.children[0])?;
                StateSet::from_states(
                    n,
                    m.states().filter(|&w| m.successors(w).iter().all(|&v| a.contains(v))),
                )
            }
            NodeKind::Mu(_) | NodeKind::Nu(_) => match self.mode {
                Iteration::Fixpoint => self.chain(env, id, None)?,
                Iteration::Steps(k) => self.chain(env, id, Some(k))?,
            },
        })
    }

    /// `F^steps` for the operator of a binder, or the limit of the chain
    /// when `steps` is `None`.
    fn chain(&self, env: &mut Assignment, binder: NodeId, steps: Option<u32>) -> Result<StateSet, EvalError> {
        let n = self.model.card();
        let (label, start) = match self.sentence.kind(binder) {
            NodeKind::Mu(x) => (x.as_str(), StateSet::empty(n)),
            NodeKind::Nu(x) => (x.as_str(), StateSet::full(n)),
            _ => return Err(EvalError::NotABinder(binder)),
        };
        let body = self.sentence.body(binder);
        let saved = env.remove(label);
        let mut current = start;
        let mut done = 0u32;
        let result = loop {
            if steps == Some(done) {
                break Ok(current);
            }
            env.insert(label, current.clone());
            let next = match self.eval(env, body) {
                Ok(next) => next,
                Err(e) => break Err(e),
            };
            done += 1;
            if next == current {
                break Ok(current);
            }
            current = next;
        };
        env.remove(label);
        if let Some(prev) = saved {
            env.insert(label, prev);
        }
        result
    }
}

fn check_bound(sentence: &Sentence, s: &Assignment, node: NodeId) -> Result<(), EvalError> {
    match sentence.free_labels(node).into_iter().find(|x| !s.contains(x)) {
        Some(x) => Err(EvalError::UnboundLabel(x)),
        None => Ok(()),
    }
}

/// `{w | M, w ⊨_s φ}` for the subformula at `node`, using least and
/// greatest fixed points.
pub fn eval_standard(
    m: &KripkeModel,
    s: &Assignment,
    sentence: &Sentence,
    node: NodeId,
) -> Result<StateSet, EvalError> {
    check_bound(sentence, s, node)?;
    let ev = Evaluator {
        model: m,
        sentence,
        mode: Iteration::Fixpoint,
    };
    ev.eval(&mut s.clone(), node)
}

/// Bounded compositional semantics: each binder denotes its `Γ`-th
/// approximant, with inner binders evaluated under the same bound.
pub fn eval_bounded(
    m: &KripkeModel,
    s: &Assignment,
    sentence: &Sentence,
    node: NodeId,
    bound: Bound,
) -> Result<StateSet, EvalError> {
    check_bound(sentence, s, node)?;
    let steps = bound.effective(m.card());
    if steps == 0 {
        return Err(EvalError::ZeroBound);
    }
    let ev = Evaluator {
        model: m,
        sentence,
        mode: Iteration::Steps(steps),
    };
    ev.eval(&mut s.clone(), node)
}

/// The `gamma`-th approximant of the operator of `binder` under bound
/// `bound`: `∅` (mu) or `W` (nu) at 0, then `F(F^(γ-1))`.
pub fn approximant(
    m: &KripkeModel,
    s: &Assignment,
    sentence: &Sentence,
    binder: NodeId,
    bound: Bound,
    gamma: u32,
) -> Result<StateSet, EvalError> {
    if !sentence.kind(binder).is_binder() {
        return Err(EvalError::NotABinder(binder));
    }
    check_bound(sentence, s, binder)?;
    let steps = bound.effective(m.card());
    if steps == 0 {
        return Err(EvalError::ZeroBound);
    }
    let ev = Evaluator {
        model: m,
        sentence,
        mode: Iteration::Steps(steps),
    };
    ev.chain(&mut s.clone(), binder, Some(gamma))
}

/// Truth set of a sentence under the standard semantics.
pub fn truth_set(m: &KripkeModel, sentence: &Sentence) -> Result<StateSet, EvalError> {
    eval_standard(m, &Assignment::new(), sentence, sentence.root())
}

/// Truth set of a sentence under the bounded semantics.
pub fn bounded_truth_set(m: &KripkeModel, sentence: &Sentence, bound: Bound) -> Result<StateSet, EvalError> {
    eval_bounded(m, &Assignment::new(), sentence, sentence.root(), bound)
}
