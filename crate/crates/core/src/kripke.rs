//! Finite Kripke models, the JSON model format, and the example families.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index of a state in model (file) order.
pub type StateId = usize;

/// A set of states of one model, stored as a membership vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    bits: Vec<bool>,
}

impl StateSet {
    pub fn empty(n: usize) -> StateSet {
        StateSet { bits: vec![false; n] }
    }

    pub fn full(n: usize) -> StateSet {
        StateSet { bits: vec![true; n] }
    }

    pub fn from_states(n: usize, states: impl IntoIterator<Item = StateId>) -> StateSet {
        let mut s = StateSet::empty(n);
        for w in states {
            s.insert(w);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, w: StateId) -> bool {
        self.bits[w]
    }

    pub fn insert(&mut self, w: StateId) {
        self.bits[w] = true;
    }

    pub fn remove(&mut self, w: StateId) {
        self.bits[w] = false;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        StateSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        StateSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn complement(&self) -> StateSet {
        StateSet {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("state {0:?} is referenced but not declared")]
    DanglingState(String),
    #[error("a model needs at least one state")]
    EmptyStates,
    #[error("state {0:?} is declared twice")]
    DuplicateState(String),
    #[error("unknown model family {0:?}")]
    UnknownFamily(String),
    #[error("family size must be at least 1")]
    ZeroSize,
}

/// On-disk model format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub val: BTreeMap<String, Vec<String>>,
}

/// A finite Kripke model `(W, R, V)`.
#[derive(Clone, PartialEq, Eq)]
pub struct KripkeModel {
    names: Vec<String>,
    index: HashMap<String, StateId>,
    succ: Vec<Vec<StateId>>,
    valuation: BTreeMap<String, StateSet>,
}

impl fmt::Debug for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KripkeModel")
            .field("states", &self.names)
            .field("succ", &self.succ)
            .field("val", &self.valuation)
            .finish()
    }
}

impl KripkeModel {
    /// Builds a model from named parts. Edges are deduplicated and each
    /// successor list is kept in state order.
    pub fn new<S: AsRef<str>>(states: &[S], edges: &[(S, S)], val: &[(S, Vec<S>)]) -> Result<KripkeModel, ModelError> {
        if states.is_empty() {
            return Err(ModelError::EmptyStates);
        }
        let names: Vec<String> = states.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(name.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| ModelError::DanglingState(s.to_string()))
        };
        let mut succ = vec![Vec::new(); names.len()];
        for (a, b) in edges {
            succ[lookup(a.as_ref())?].push(lookup(b.as_ref())?);
        }
        for list in &mut succ {
            list.sort_unstable();
            list.dedup();
        }
        let mut valuation = BTreeMap::new();
        for (p, ws) in val {
            let mut set = StateSet::empty(names.len());
            for w in ws {
                set.insert(lookup(w.as_ref())?);
            }
            valuation.insert(p.as_ref().to_string(), set);
        }
        Ok(KripkeModel {
            names,
            index,
            succ,
            valuation,
        })
    }

    /// Builds a model over states `0..n` named `w_0 .. w_{n-1}`.
    pub fn from_indices(
        n: usize,
        edges: impl IntoIterator<Item = (StateId, StateId)>,
        val: impl IntoIterator<Item = (String, StateSet)>,
    ) -> Result<KripkeModel, ModelError> {
        let names: Vec<String> = (0..n).map(|i| format!("w_{i}")).collect();
        KripkeModel::from_named_indices(names, edges, val)
    }

    pub fn from_named_indices(
        names: Vec<String>,
        edges: impl IntoIterator<Item = (StateId, StateId)>,
        val: impl IntoIterator<Item = (String, StateSet)>,
    ) -> Result<KripkeModel, ModelError> {
        let n = names.len();
        if n == 0 {
            return Err(ModelError::EmptyStates);
        }
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(name.clone()));
            }
        }
        let mut succ = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(ModelError::DanglingState(format!("#{}", a.max(b))));
            }
            succ[a].push(b);
        }
        for list in &mut succ {
            list.sort_unstable();
            list.dedup();
        }
        let mut valuation = BTreeMap::new();
        for (p, set) in val {
            if set.universe() != n {
                return Err(ModelError::DanglingState(format!("valuation of {p}")));
            }
            valuation.insert(p, set);
        }
        Ok(KripkeModel {
            names,
            index,
            succ,
            valuation,
        })
    }

    pub fn card(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn name(&self, w: StateId) -> &str {
        &self.names[w]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn successors(&self, w: StateId) -> &[StateId] {
        &self.succ[w]
    }

    pub fn has_edge(&self, a: StateId, b: StateId) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Whether `w ∈ V(p)`. Propositions absent from the valuation are false
    /// everywhere.
    pub fn holds(&self, p: &str, w: StateId) -> bool {
        self.valuation.get(p).is_some_and(|s| s.contains(w))
    }

    pub fn valuation(&self, p: &str) -> StateSet {
        self.valuation
            .get(p)
            .cloned()
            .unwrap_or_else(|| StateSet::empty(self.card()))
    }

    pub fn propositions(&self) -> impl Iterator<Item = &str> {
        self.valuation.keys().map(String::as_str)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            states: self.names.clone(),
            edges: self
                .states()
                .flat_map(|a| self.succ[a].iter().map(move |&b| (a, b)))
                .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
                .collect(),
            val: self
                .valuation
                .iter()
                .map(|(p, set)| (p.clone(), set.iter().map(|w| self.names[w].clone()).collect()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serialization")
    }
}

impl TryFrom<ModelFile> for KripkeModel {
    type Error = ModelError;

    fn try_from(file: ModelFile) -> Result<Self, Self::Error> {
        let val: Vec<(String, Vec<String>)> = file.val.into_iter().collect();
        KripkeModel::new(&file.states, &file.edges, &val)
    }
}

/// Label valuation `s`: label name to a set of states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    map: BTreeMap<String, StateSet>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn get(&self, label: &str) -> Option<&StateSet> {
        self.map.get(label)
    }

    /// `s[A/X]`
    pub fn with(mut self, label: &str, set: StateSet) -> Assignment {
        self.map.insert(label.to_string(), set);
        self
    }

    pub fn insert(&mut self, label: &str, set: StateSet) -> Option<StateSet> {
        self.map.insert(label.to_string(), set)
    }

    pub fn remove(&mut self, label: &str) -> Option<StateSet> {
        self.map.remove(label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.map.contains_key(label)
    }
}

/// Reads a model from UTF-8 JSON. Unknown top-level keys are ignored, so
/// exported reduced models load as plain models.
pub fn load_model(bytes: &[u8]) -> Result<KripkeModel, ModelError> {
    let file: ModelFile = serde_json::from_slice(bytes)?;
    KripkeModel::try_from(file)
}

/// Finite members of the example families.
///
/// * `starN`: states `w_0..w_n`, edges `w_0 -> w_i` (1 ≤ i ≤ n) and
///   `w_{i+1} -> w_i` (0 ≤ i < n), `V(p) = {w_0}`.
/// * `daggerN`: the same graph with `V(p) = {w_1}`.
/// * `chain`: `w_0 -> w_1 -> ... -> w_n`, `V(p) = {w_n}`.
/// * `clique`: complete graph (with loops) on `w_0..w_n`, `V(p) = {w_0}`.
/// * `ar-grid`: an `n x n` grid `g_i_j` with right/down moves and a wrap-around
///   from the last row back to the first; `q_B` on cells with `i + j` even,
///   `p_B` on the bottom-right cell.
pub fn generate_family(name: &str, n: usize) -> Result<KripkeModel, ModelError> {
    if n == 0 {
        return Err(ModelError::ZeroSize);
    }
    match name {
        "starN" | "daggerN" => {
            let mut edges: Vec<(StateId, StateId)> = (1..=n).map(|i| (0, i)).collect();
            edges.extend((0..n).map(|i| (i + 1, i)));
            let marked = if name == "starN" { 0 } else { 1 };
            KripkeModel::from_indices(
                n + 1,
                edges,
                [("p".to_string(), StateSet::from_states(n + 1, [marked]))],
            )
        }
        "chain" => KripkeModel::from_indices(
            n + 1,
            (0..n).map(|i| (i, i + 1)),
            [("p".to_string(), StateSet::from_states(n + 1, [n]))],
        ),
        "clique" => KripkeModel::from_indices(
            n + 1,
            (0..=n).flat_map(|a| (0..=n).map(move |b| (a, b))),
            [("p".to_string(), StateSet::from_states(n + 1, [0]))],
        ),
        "ar-grid" => {
            let id = |i: usize, j: usize| i * n + j;
            let names = (0..n).flat_map(|i| (0..n).map(move |j| format!("g_{i}_{j}"))).collect();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if j + 1 < n {
                        edges.push((id(i, j), id(i, j + 1)));
                    }
                    if i + 1 < n {
                        edges.push((id(i, j), id(i + 1, j)));
                    } else if j + 1 < n {
                        edges.push((id(i, j), id(0, j)));
                    }
                }
            }
            let q = StateSet::from_states(
                n * n,
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|(i, j)| (i + j) % 2 == 0)
                    .map(|(i, j)| id(i, j)),
            );
            let p = StateSet::from_states(n * n, [id(n - 1, n - 1)]);
            KripkeModel::from_named_indices(names, edges, [("p_B".to_string(), p), ("q_B".to_string(), q)])
        }
        other => Err(ModelError::UnknownFamily(other.to_string())),
    }
}

/// All models on `n` states over the given propositions: every edge set and
/// every valuation. Yields `2^(n*n) * 2^(n*|props|)` models.
pub fn enumerate_models(n: usize, props: &[&str]) -> impl Iterator<Item = KripkeModel> {
    let props: Vec<String> = props.iter().map(|p| p.to_string()).collect();
    let edge_sets = 1u64 << (n * n);
    let vals = 1u64 << (n * props.len());
    (0..edge_sets).flat_map(move |e| {
        let props = props.clone();
        (0..vals).map(move |v| model_from_codes(n, &props, e, v))
    })
}

/// Decodes an edge bitmask and a valuation bitmask into a model.
pub fn model_from_codes(n: usize, props: &[String], edges: u64, val: u64) -> KripkeModel {
    let edge_list = (0..n * n)
        .filter(|bit| edges >> bit & 1 == 1)
        .map(|bit| (bit / n, bit % n));
    let valuation = props.iter().enumerate().map(|(k, p)| {
        let set = StateSet::from_states(n, (0..n).filter(|w| val >> (k * n + w) & 1 == 1));
        (p.clone(), set)
    });
    KripkeModel::from_indices(n, edge_list, valuation).expect("codes describe a valid model")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_model_m1() {
        let m = load_model(br#"{"states":["a","b"],"edges":[["a","b"],["b","b"]],"val":{"p":["b"]}}"#).unwrap();
        assert_eq!(m.card(), 2);
        assert_eq!(m.successors(0), &[1]);
        assert_eq!(m.successors(1), &[1]);
        assert!(m.holds("p", 1) && !m.holds("p", 0));
        assert!(!m.holds("q", 0));
        assert_eq!(m.name(0), "a");
    }

    #[test]
    fn dangling_state_is_rejected() {
        let err = load_model(br#"{"states":["a","b"],"edges":[["a","c"]],"val":{}}"#).unwrap_err();
        assert!(matches!(err, ModelError::DanglingState(s) if s == "c"));
        let err = load_model(br#"{"states":["a"],"edges":[],"val":{"p":["z"]}}"#).unwrap_err();
        assert!(matches!(err, ModelError::DanglingState(s) if s == "z"));
    }

    #[test]
    fn empty_and_malformed_models() {
        assert!(matches!(
            load_model(br#"{"states":[],"edges":[],"val":{}}"#),
            Err(ModelError::EmptyStates)
        ));
        assert!(matches!(load_model(b"{"), Err(ModelError::Parse(_))));
        assert!(matches!(
            load_model(br#"{"states":["a","a"],"edges":[]}"#),
            Err(ModelError::DuplicateState(_))
        ));
    }

    #[test]
    fn extra_keys_are_ignored() {
        let m = load_model(br#"{"states":["a"],"edges":[],"val":{},"root":"a","backmap":{}}"#).unwrap();
        assert_eq!(m.card(), 1);
    }

    #[test]
    fn star_family() {
        let m = generate_family("starN", 2).unwrap();
        assert_eq!(m.card(), 3);
        let mut edges: Vec<(usize, usize)> = m
            .states()
            .flat_map(|a| m.successors(a).iter().map(move |&b| (a, b)))
            .collect();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 0), (2, 1)]);
        assert_eq!(m.valuation("p"), StateSet::from_states(3, [0]));
    }

    #[test]
    fn dagger_and_chain_families() {
        let d = generate_family("daggerN", 2).unwrap();
        assert_eq!(d.valuation("p"), StateSet::from_states(3, [1]));
        assert_eq!(d.edge_count(), 4);
        let c = generate_family("chain", 1).unwrap();
        assert_eq!(c.card(), 2);
        assert_eq!(c.successors(0), &[1]);
        assert!(c.successors(1).is_empty());
        assert!(c.holds("p", 1));
        let k = generate_family("clique", 2).unwrap();
        assert_eq!(k.edge_count(), 9);
    }

    #[test]
    fn ar_grid_vocabulary() {
        let g = generate_family("ar-grid", 3).unwrap();
        assert_eq!(g.card(), 9);
        let props: Vec<&str> = g.propositions().collect();
        assert_eq!(props, vec!["p_B", "q_B"]);
        assert!(g.holds("p_B", 8));
    }

    #[test]
    fn family_errors() {
        assert!(matches!(generate_family("starN", 0), Err(ModelError::ZeroSize)));
        assert!(matches!(generate_family("torus", 2), Err(ModelError::UnknownFamily(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        for fam in ["starN", "daggerN", "chain", "clique", "ar-grid"] {
            assert_eq!(generate_family(fam, 4).unwrap(), generate_family(fam, 4).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let m = generate_family("daggerN", 3).unwrap();
        assert_eq!(load_model(m.to_json().as_bytes()).unwrap(), m);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_models(1, &["p", "q"]).count(), 2 * 4);
        assert_eq!(enumerate_models(2, &["p", "q"]).count(), 16 * 16);
    }
}
