//! Occurrence-identified syntax for the modal mu-calculus.
//!
//! A [`Sentence`] stores its syntax tree as a flat node table. Node ids are
//! dense and assigned in pre-order, so the root is always `NodeId(0)` and the
//! subtree of a node `n` occupies the contiguous id range
//! `n ..= SyntaxIndex::subtree_end(n)`. Two occurrences of the same
//! subformula always get distinct ids.
//!
//! Concrete syntax:
//!
//! ```text
//! sentence := expr
//! expr     := binder | disj
//! binder   := ("mu" | "nu") LABEL "." expr
//! disj     := conj ("|" conj)*
//! conj     := unary ("&" unary)*
//! unary    := "<>" unary | "[]" unary | "!" PROP | PROP | LABEL
//!           | "(" expr ")" | binder
//! ```
//!
//! Propositions start with a lowercase letter, labels with an uppercase
//! letter. A binder's scope extends as far right as possible.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Prop(String),
    NegProp(String),
    Label(String),
    Or,
    And,
    Diamond,
    Box,
    Mu(String),
    Nu(String),
}

impl NodeKind {
    pub fn is_literal(&self) -> bool {
        matches!(self, NodeKind::Prop(_) | NodeKind::NegProp(_))
    }

    pub fn is_binder(&self) -> bool {
        matches!(self, NodeKind::Mu(_) | NodeKind::Nu(_))
    }

    /// Label name bound by a `Mu`/`Nu` node.
    pub fn binder_label(&self) -> Option<&str> {
        match self {
            NodeKind::Mu(x) | NodeKind::Nu(x) => Some(x),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            NodeKind::Prop(_) | NodeKind::NegProp(_) | NodeKind::Label(_) => 0,
            NodeKind::Diamond | NodeKind::Box | NodeKind::Mu(_) | NodeKind::Nu(_) => 1,
            NodeKind::Or | NodeKind::And => 2,
        }
    }

    fn dual(&self) -> NodeKind {
        match self {
            NodeKind::Prop(p) => NodeKind::NegProp(p.clone()),
            NodeKind::NegProp(p) => NodeKind::Prop(p.clone()),
            NodeKind::Label(x) => NodeKind::Label(x.clone()),
            NodeKind::Or => NodeKind::And,
            NodeKind::And => NodeKind::Or,
            NodeKind::Diamond => NodeKind::Box,
            NodeKind::Box => NodeKind::Diamond,
            NodeKind::Mu(x) => NodeKind::Nu(x.clone()),
            NodeKind::Nu(x) => NodeKind::Mu(x.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

/// Tree-shaped formula, used to build sentences programmatically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Prop(String),
    NegProp(String),
    Label(String),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

impl Formula {
    pub fn prop(p: &str) -> Formula {
        Formula::Prop(p.to_string())
    }

    pub fn neg(p: &str) -> Formula {
        Formula::NegProp(p.to_string())
    }

    pub fn label(x: &str) -> Formula {
        Formula::Label(x.to_string())
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn diamond(a: Formula) -> Formula {
        Formula::Diamond(Box::new(a))
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::Box(Box::new(a))
    }

    pub fn mu(x: &str, body: Formula) -> Formula {
        Formula::Mu(x.to_string(), Box::new(body))
    }

    pub fn nu(x: &str, body: Formula) -> Formula {
        Formula::Nu(x.to_string(), Box::new(body))
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Prop(_) | Formula::NegProp(_) | Formula::Label(_) => 1,
            Formula::Or(a, b) | Formula::And(a, b) => 1 + a.size() + b.size(),
            Formula::Diamond(a) | Formula::Box(a) | Formula::Mu(_, a) | Formula::Nu(_, a) => 1 + a.size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("lex error at offset {offset}: unexpected character {found:?}")]
    Lex { offset: usize, found: char },
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("free label {0} (every label must be bound by an enclosing mu or nu)")]
    FreeLabel(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Mu,
    Nu,
    Dot,
    Diamond,
    Box,
    Or,
    And,
    Not,
    LParen,
    RParen,
    Prop(String),
    Label(String),
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Mu => f.write_str("'mu'"),
            Token::Nu => f.write_str("'nu'"),
            Token::Dot => f.write_str("'.'"),
            Token::Diamond => f.write_str("'<>'"),
            Token::Box => f.write_str("'[]'"),
            Token::Or => f.write_str("'|'"),
            Token::And => f.write_str("'&'"),
            Token::Not => f.write_str("'!'"),
            Token::LParen => f.write_str("'('"),
            Token::RParen => f.write_str("')'"),
            Token::Prop(p) => write!(f, "proposition {p}"),
            Token::Label(x) => write!(f, "label {x}"),
            Token::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let two = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>, second: char| {
            chars.next();
            match chars.peek() {
                Some(&(_, d)) if d == second => {
                    chars.next();
                    Ok(())
                }
                Some(&(j, d)) => Err(ParseError::Lex { offset: j, found: d }),
                None => Err(ParseError::Lex { offset: i, found: c }),
            }
        };
        let tok = match c {
            '<' => {
                two(&mut chars, '>')?;
                Token::Diamond
            }
            '[' => {
                two(&mut chars, ']')?;
                Token::Box
            }
            '.' | '|' | '&' | '!' | '(' | ')' => {
                chars.next();
                match c {
                    '.' => Token::Dot,
                    '|' => Token::Or,
                    '&' => Token::And,
                    '!' => Token::Not,
                    '(' => Token::LParen,
                    _ => Token::RParen,
                }
            }
            c if c.is_ascii_alphabetic() => {
                let mut ident = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        ident.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                match ident.as_str() {
                    "mu" => Token::Mu,
                    "nu" => Token::Nu,
                    _ if c.is_ascii_uppercase() => Token::Label(ident),
                    _ => Token::Prop(ident),
                }
            }
            other => {
                return Err(ParseError::Lex {
                    offset: i,
                    found: other,
                })
            }
        };
        out.push((i, tok));
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        let (offset, found) = &self.tokens[self.pos];
        ParseError::Syntax {
            offset: *offset,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Token::Mu | Token::Nu => self.binder(),
            _ => self.disj(),
        }
    }

    fn binder(&mut self) -> Result<Formula, ParseError> {
        let is_mu = self.bump() == Token::Mu;
        let label = match self.bump() {
            Token::Label(x) => x,
            _ => {
                self.pos -= 1;
                return Err(self.error("a label after the binder"));
            }
        };
        if self.peek() != &Token::Dot {
            return Err(self.error("'.'"));
        }
        self.bump();
        let body = Box::new(self.expr()?);
        Ok(if is_mu {
            Formula::Mu(label, body)
        } else {
            Formula::Nu(label, body)
        })
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conj()?;
        while self.peek() == &Token::Or {
            self.bump();
            let rhs = self.conj()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == &Token::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Diamond => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            Token::Box => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Token::Not => {
                self.bump();
                match self.bump() {
                    Token::Prop(p) => Ok(Formula::NegProp(p)),
                    _ => {
                        self.pos -= 1;
                        Err(self.error("a proposition after '!'"))
                    }
                }
            }
            Token::Prop(p) => {
                self.bump();
                Ok(Formula::Prop(p))
            }
            Token::Label(x) => {
                self.bump();
                Ok(Formula::Label(x))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != &Token::RParen {
                    return Err(self.error("')'"));
                }
                self.bump();
                Ok(inner)
            }
            Token::Mu | Token::Nu => self.binder(),
            _ => Err(self.error("a formula")),
        }
    }
}

/// Parses text into a tree without checking for free labels.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let f = parser.expr()?;
    if parser.peek() != &Token::End {
        return Err(parser.error("end of input"));
    }
    Ok(f)
}

/// Parses a sentence. Formulas with free labels are rejected.
pub fn parse(text: &str) -> Result<Sentence, ParseError> {
    Sentence::from_formula(&parse_formula(text)?)
}

/// Parses a possibly open formula (library use: compositional engines with
/// an explicit assignment).
pub fn parse_open(text: &str) -> Result<Sentence, ParseError> {
    Ok(Sentence::from_formula_open(&parse_formula(text)?))
}

/// A formula stored as an occurrence-identified node table. Despite the name
/// it may be open when built through [`parse_open`] or
/// [`Sentence::from_formula_open`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    nodes: Vec<Node>,
}

impl Sentence {
    pub fn from_formula(f: &Formula) -> Result<Sentence, ParseError> {
        let s = Sentence::from_formula_open(f);
        if let Some(x) = s.free_labels(s.root()).into_iter().next() {
            return Err(ParseError::FreeLabel(x));
        }
        Ok(s)
    }

    pub fn from_formula_open(f: &Formula) -> Sentence {
        let mut nodes = Vec::with_capacity(f.size());
        flatten(f, None, &mut nodes);
        Sentence { nodes }
    }

    pub fn to_formula(&self) -> Formula {
        self.formula_at(self.root())
    }

    pub fn formula_at(&self, id: NodeId) -> Formula {
        let node = self.node(id);
        let child = |i: usize| Box::new(self.formula_at(node.children[i]));
        match &node.kind {
            NodeKind::Prop(p) => Formula::Prop(p.clone()),
            NodeKind::NegProp(p) => Formula::NegProp(p.clone()),
            NodeKind::Label(x) => Formula::Label(x.clone()),
            NodeKind::Or => Formula::Or(child(0), child(1)),
            NodeKind::And => Formula::And(child(0), child(1)),
            NodeKind::Diamond => Formula::Diamond(child(0)),
            NodeKind::Box => Formula::Box(child(0)),
            NodeKind::Mu(x) => Formula::Mu(x.clone(), child(0)),
            NodeKind::Nu(x) => Formula::Nu(x.clone(), child(0)),
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.0].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    /// The single child of a unary node (modalities and binders).
    pub fn body(&self, id: NodeId) -> NodeId {
        self.nodes[id.0].children[0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Number of syntax-tree nodes; each binder counts once.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn binder_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind.is_binder()).count()
    }

    /// Slash-separated child indices from the root, e.g. `/0/1`; the root is `/`.
    pub fn path(&self, id: NodeId) -> String {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.parent(cur) {
            let idx = self.children(parent).iter().position(|&c| c == cur).unwrap();
            steps.push(idx);
            cur = parent;
        }
        if steps.is_empty() {
            return "/".to_string();
        }
        steps.iter().rev().map(|i| format!("/{i}")).collect()
    }

    /// Labels occurring free in the subformula at `id`.
    pub fn free_labels(&self, id: NodeId) -> BTreeSet<String> {
        let mut free = BTreeSet::new();
        let mut bound: Vec<&str> = Vec::new();
        self.collect_free(id, &mut bound, &mut free);
        free
    }

    fn collect_free<'a>(&'a self, id: NodeId, bound: &mut Vec<&'a str>, free: &mut BTreeSet<String>) {
        let node = self.node(id);
        match &node.kind {
            NodeKind::Label(x) => {
                if !bound.contains(&x.as_str()) {
                    free.insert(x.clone());
                }
            }
            NodeKind::Mu(x) | NodeKind::Nu(x) => {
                bound.push(x);
                self.collect_free(node.children[0], bound, free);
                bound.pop();
            }
            _ => {
                for &c in &node.children {
                    self.collect_free(c, bound, free);
                }
            }
        }
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Prop(p) | NodeKind::NegProp(p) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    /// Canonical fully parenthesized rendering; `parse(render(s)) == s`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(self.root(), &mut out);
        out
    }

    pub fn render_node(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.render_into(id, &mut out);
        out
    }

    fn render_into(&self, id: NodeId, out: &mut String) {
        let node = self.node(id);
        let wrap = |child: NodeId, out: &mut String| {
            if self.kind(child).arity() == 0 {
                self.render_into(child, out);
            } else {
                out.push('(');
                self.render_into(child, out);
                out.push(')');
            }
        };
        match &node.kind {
            NodeKind::Prop(p) => out.push_str(p),
            NodeKind::NegProp(p) => {
                out.push('!');
                out.push_str(p);
            }
            NodeKind::Label(x) => out.push_str(x),
            NodeKind::Or | NodeKind::And => {
                wrap(node.children[0], out);
                out.push_str(if node.kind == NodeKind::Or { " | " } else { " & " });
                wrap(node.children[1], out);
            }
            NodeKind::Diamond => {
                out.push_str("<> ");
                wrap(node.children[0], out);
            }
            NodeKind::Box => {
                out.push_str("[] ");
                wrap(node.children[0], out);
            }
            NodeKind::Mu(x) | NodeKind::Nu(x) => {
                out.push_str(if matches!(node.kind, NodeKind::Mu(_)) {
                    "mu "
                } else {
                    "nu "
                });
                out.push_str(x);
                out.push_str(". ");
                wrap(node.children[0], out);
            }
        }
    }

    /// True when no label name is bound by two different binders.
    pub fn is_normal(&self) -> bool {
        let mut seen = HashSet::new();
        self.nodes
            .iter()
            .filter_map(|n| n.kind.binder_label())
            .all(|x| seen.insert(x))
    }

    /// Renames binders so that their label names are pairwise distinct.
    /// The first binder (in pre-order) keeps its name; later clashes get
    /// `X1`, `X2`, ... fresh with respect to every label in the formula.
    pub fn normalize(&self) -> Sentence {
        if self.is_normal() {
            return self.clone();
        }
        let mut used: HashSet<String> = self
            .nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Label(x) | NodeKind::Mu(x) | NodeKind::Nu(x) => Some(x.clone()),
                _ => None,
            })
            .collect();
        let mut binder_names: HashSet<String> = HashSet::new();
        let mut scope: Vec<(String, String)> = Vec::new();
        let renamed = rename(&self.to_formula(), &mut used, &mut binder_names, &mut scope);
        Sentence::from_formula_open(&renamed)
    }

    /// De Morgan and fixpoint dual: the negation of `self` in negation
    /// normal form. Labels are kept as they are.
    pub fn dual(&self) -> Sentence {
        Sentence {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    kind: n.kind.dual(),
                    children: n.children.clone(),
                    parent: n.parent,
                })
                .collect(),
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for Sentence {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn flatten(f: &Formula, parent: Option<NodeId>, nodes: &mut Vec<Node>) -> NodeId {
    let id = NodeId(nodes.len());
    let (kind, kids): (NodeKind, Vec<&Formula>) = match f {
        Formula::Prop(p) => (NodeKind::Prop(p.clone()), vec![]),
        Formula::NegProp(p) => (NodeKind::NegProp(p.clone()), vec![]),
        Formula::Label(x) => (NodeKind::Label(x.clone()), vec![]),
        Formula::Or(a, b) => (NodeKind::Or, vec![a, b]),
        Formula::And(a, b) => (NodeKind::And, vec![a, b]),
        Formula::Diamond(a) => (NodeKind::Diamond, vec![a]),
        Formula::Box(a) => (NodeKind::Box, vec![a]),
        Formula::Mu(x, a) => (NodeKind::Mu(x.clone()), vec![a]),
        Formula::Nu(x, a) => (NodeKind::Nu(x.clone()), vec![a]),
    };
    nodes.push(Node {
        kind,
        children: Vec::new(),
        parent,
    });
    for k in kids {
        let c = flatten(k, Some(id), nodes);
        nodes[id.0].children.push(c);
    }
    id
}

fn rename(
    f: &Formula,
    used: &mut HashSet<String>,
    binder_names: &mut HashSet<String>,
    scope: &mut Vec<(String, String)>,
) -> Formula {
    let binder = |x: &String,
                  body: &Formula,
                  used: &mut HashSet<String>,
                  binder_names: &mut HashSet<String>,
                  scope: &mut Vec<(String, String)>| {
        let fresh = if binder_names.contains(x) {
            (1..)
                .map(|i| format!("{x}{i}"))
                .find(|cand| !used.contains(cand))
                .unwrap()
        } else {
            x.clone()
        };
        used.insert(fresh.clone());
        binder_names.insert(fresh.clone());
        scope.push((x.clone(), fresh.clone()));
        let body = rename(body, used, binder_names, scope);
        scope.pop();
        (fresh, Box::new(body))
    };
    match f {
        Formula::Label(x) => {
            let new = scope
                .iter()
                .rev()
                .find(|(old, _)| old == x)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| x.clone());
            Formula::Label(new)
        }
        Formula::Prop(_) | Formula::NegProp(_) => f.clone(),
        Formula::Or(a, b) => Formula::Or(
            Box::new(rename(a, used, binder_names, scope)),
            Box::new(rename(b, used, binder_names, scope)),
        ),
        Formula::And(a, b) => Formula::And(
            Box::new(rename(a, used, binder_names, scope)),
            Box::new(rename(b, used, binder_names, scope)),
        ),
        Formula::Diamond(a) => Formula::Diamond(Box::new(rename(a, used, binder_names, scope))),
        Formula::Box(a) => Formula::Box(Box::new(rename(a, used, binder_names, scope))),
        Formula::Mu(x, a) => {
            let (x, a) = binder(x, a, used, binder_names, scope);
            Formula::Mu(x, a)
        }
        Formula::Nu(x, a) => {
            let (x, a) = binder(x, a, used, binder_names, scope);
            Formula::Nu(x, a)
        }
    }
}

/// Binder resolution and ancestry tables for a sentence.
#[derive(Clone, Debug)]
pub struct SyntaxIndex {
    rf: Vec<Option<NodeId>>,
    mu_nu_nodes: Vec<NodeId>,
    active_ancestors: Vec<Vec<NodeId>>,
    subtree_end: Vec<NodeId>,
    size: usize,
}

impl SyntaxIndex {
    /// Reference formula of a label occurrence: the innermost enclosing
    /// binder with the same name. `None` for non-label nodes and free labels.
    pub fn rf(&self, label: NodeId) -> Option<NodeId> {
        self.rf[label.0]
    }

    pub fn mu_nu_nodes(&self) -> &[NodeId] {
        &self.mu_nu_nodes
    }

    /// Strict `Mu`/`Nu` ancestors of a node, ordered root to node.
    pub fn active_ancestors(&self, id: NodeId) -> &[NodeId] {
        &self.active_ancestors[id.0]
    }

    /// Last node id (inclusive) in the subtree rooted at `id`.
    pub fn subtree_end(&self, id: NodeId) -> NodeId {
        self.subtree_end[id.0]
    }

    pub fn in_subtree(&self, root: NodeId, id: NodeId) -> bool {
        root <= id && id <= self.subtree_end[root.0]
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Builds the binder index. Resolution is by innermost enclosing binder, so
/// the table is well defined on any formula; the game engines additionally
/// expect normal form (see [`Sentence::normalize`]).
pub fn build_index(s: &Sentence) -> SyntaxIndex {
    let n = s.size();
    let mut rf = vec![None; n];
    let mut active = vec![Vec::new(); n];
    let mut subtree_end = vec![NodeId(0); n];
    let mut stack: Vec<NodeId> = Vec::new();
    fn walk(
        s: &Sentence,
        id: NodeId,
        stack: &mut Vec<NodeId>,
        rf: &mut [Option<NodeId>],
        active: &mut [Vec<NodeId>],
        subtree_end: &mut [NodeId],
    ) -> NodeId {
        active[id.0] = stack.clone();
        let node = s.node(id);
        if let NodeKind::Label(x) = &node.kind {
            rf[id.0] = stack
                .iter()
                .rev()
                .copied()
                .find(|b| s.kind(*b).binder_label() == Some(x.as_str()));
        }
        let pushed = node.kind.is_binder();
        if pushed {
            stack.push(id);
        }
        let mut last = id;
        for &c in &node.children {
            last = walk(s, c, stack, rf, active, subtree_end);
        }
        if pushed {
            stack.pop();
        }
        subtree_end[id.0] = last;
        last
    }
    walk(s, s.root(), &mut stack, &mut rf, &mut active, &mut subtree_end);
    let mu_nu_nodes = s.node_ids().filter(|&id| s.kind(id).is_binder()).collect();
    SyntaxIndex {
        rf,
        mu_nu_nodes,
        active_ancestors: active,
        subtree_end,
        size: n,
    }
}

/// Label name to binder lookup for normal-form sentences.
pub fn binders_by_label(s: &Sentence) -> HashMap<String, NodeId> {
    s.node_ids()
        .filter_map(|id| s.kind(id).binder_label().map(|x| (x.to_string(), id)))
        .collect()
}
