//! Immutable Boolean formula DAGs.
//!
//! A [`Formula`] is a reference-counted node; cloning is cheap and shared
//! subterms stay shared through substitution. Nodes carry a precomputed
//! structural hash so formulas can key hash maps without walking the DAG.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{BitAnd, BitOr, BitXor, Not};
use std::sync::Arc;

use thiserror::Error;

/// Wire names reserved for the constants.
pub const RESERVED_NAMES: [&str; 2] = ["const0", "const1"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("incomplete assignment: variable `{0}` has no value")]
    IncompleteAssignment(VarId),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
}

/// A named Boolean variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(Arc<str>);

impl VarId {
    pub fn new(name: &str) -> Result<Self, FormulaError> {
        if name.is_empty() || RESERVED_NAMES.contains(&name) {
            return Err(FormulaError::InvalidName(name.to_string()));
        }
        Ok(VarId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand used heavily in tests and builtin construction.
///
/// Panics on reserved or empty names.
pub fn var(name: &str) -> Formula {
    Formula::var(VarId::new(name).expect("valid variable name"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Const(bool),
    Var(VarId),
    Not(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    Xor(Formula, Formula),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
}

#[derive(Clone)]
pub struct Formula(Arc<Node>);

impl Formula {
    fn make(kind: Kind) -> Self {
        let mut h = DefaultHasher::new();
        match &kind {
            Kind::Const(b) => (0u8, *b).hash(&mut h),
            Kind::Var(v) => (1u8, v).hash(&mut h),
            Kind::Not(a) => (2u8, a.0.hash).hash(&mut h),
            Kind::And(a, b) => (3u8, a.0.hash, b.0.hash).hash(&mut h),
            Kind::Or(a, b) => (4u8, a.0.hash, b.0.hash).hash(&mut h),
            Kind::Xor(a, b) => (5u8, a.0.hash, b.0.hash).hash(&mut h),
        }
        Formula(Arc::new(Node {
            kind,
            hash: h.finish(),
        }))
    }

    pub fn constant(value: bool) -> Self {
        Self::make(Kind::Const(value))
    }

    pub fn zero() -> Self {
        Self::constant(false)
    }

    pub fn one() -> Self {
        Self::constant(true)
    }

    pub fn var(id: VarId) -> Self {
        Self::make(Kind::Var(id))
    }

    pub fn negate(&self) -> Self {
        Self::make(Kind::Not(self.clone()))
    }

    pub fn and(&self, rhs: &Formula) -> Self {
        Self::make(Kind::And(self.clone(), rhs.clone()))
    }

    pub fn or(&self, rhs: &Formula) -> Self {
        Self::make(Kind::Or(self.clone(), rhs.clone()))
    }

    pub fn xor(&self, rhs: &Formula) -> Self {
        Self::make(Kind::Xor(self.clone(), rhs.clone()))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn as_const(&self) -> Option<bool> {
        match self.kind() {
            Kind::Const(b) => Some(*b),
            _ => None,
        }
    }

    /// Identity of this DAG node (not of the function it denotes).
    pub fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let (a, b) = match self.kind() {
            Kind::Const(_) | Kind::Var(_) => (None, None),
            Kind::Not(a) => (Some(a), None),
            Kind::And(a, b) | Kind::Or(a, b) | Kind::Xor(a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }

    /// Distinct DAG nodes in post-order: every node appears after its children.
    pub fn postorder(&self) -> Vec<Formula> {
        let mut order = Vec::new();
        let mut seen = HashSet::new();
        let mut stack: Vec<(Formula, bool)> = vec![(self.clone(), false)];
        while let Some((node, expanded)) = stack.pop() {
            if expanded {
                order.push(node);
                continue;
            }
            if !seen.insert(node.node_id()) {
                continue;
            }
            stack.push((node.clone(), true));
            for child in node.children() {
                if !seen.contains(&child.node_id()) {
                    stack.push((child.clone(), false));
                }
            }
        }
        order
    }

    pub fn node_count(&self) -> usize {
        self.postorder().len()
    }

    /// The variables syntactically reachable from the root.
    pub fn free_vars(&self) -> BTreeSet<VarId> {
        self.postorder()
            .into_iter()
            .filter_map(|n| match n.kind() {
                Kind::Var(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }

    /// `self[value/x]` with constant folding of nodes whose children became constant.
    pub fn substitute(&self, x: &VarId, value: bool) -> Formula {
        let mut binding = BTreeMap::new();
        binding.insert(x.clone(), value);
        self.substitute_all(&binding)
    }

    /// Simultaneous substitution of several variables.
    pub fn substitute_all(&self, binding: &BTreeMap<VarId, bool>) -> Formula {
        let mut rewritten: HashMap<usize, Formula> = HashMap::new();
        for node in self.postorder() {
            let get = |f: &Formula| rewritten[&f.node_id()].clone();
            let new = match node.kind() {
                Kind::Const(_) => node.clone(),
                Kind::Var(v) => match binding.get(v) {
                    Some(&b) => Formula::constant(b),
                    None => node.clone(),
                },
                Kind::Not(a) => {
                    let na = get(a);
                    match na.as_const() {
                        Some(b) => Formula::constant(!b),
                        None if na.ptr_eq(a) => node.clone(),
                        None => na.negate(),
                    }
                }
                Kind::And(a, b) | Kind::Or(a, b) | Kind::Xor(a, b) => {
                    let (na, nb) = (get(a), get(b));
                    fold_binary(&node, na, nb, a, b)
                }
            };
            rewritten.insert(node.node_id(), new);
        }
        rewritten.remove(&self.node_id()).expect("root rewritten")
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, FormulaError> {
        let mut values: HashMap<usize, bool> = HashMap::new();
        for node in self.postorder() {
            let get = |f: &Formula| values[&f.node_id()];
            let v = match node.kind() {
                Kind::Const(b) => *b,
                Kind::Var(x) => assignment
                    .get(x)
                    .ok_or_else(|| FormulaError::IncompleteAssignment(x.clone()))?,
                Kind::Not(a) => !get(a),
                Kind::And(a, b) => get(a) && get(b),
                Kind::Or(a, b) => get(a) || get(b),
                Kind::Xor(a, b) => get(a) ^ get(b),
            };
            values.insert(node.node_id(), v);
        }
        Ok(values[&self.node_id()])
    }

    /// Evaluates 64 assignments at once; bit `k` of each input word is the
    /// variable's value in assignment `k`.
    pub fn evaluate_words(&self, inputs: &HashMap<VarId, u64>) -> Result<u64, FormulaError> {
        let mut words: HashMap<usize, u64> = HashMap::new();
        for node in self.postorder() {
            let get = |f: &Formula| words[&f.node_id()];
            let w = match node.kind() {
                Kind::Const(b) => {
                    if *b {
                        u64::MAX
                    } else {
                        0
                    }
                }
                Kind::Var(x) => *inputs
                    .get(x)
                    .ok_or_else(|| FormulaError::IncompleteAssignment(x.clone()))?,
                Kind::Not(a) => !get(a),
                Kind::And(a, b) => get(a) & get(b),
                Kind::Or(a, b) => get(a) | get(b),
                Kind::Xor(a, b) => get(a) ^ get(b),
            };
            words.insert(node.node_id(), w);
        }
        Ok(words[&self.node_id()])
    }
}

fn fold_binary(node: &Formula, na: Formula, nb: Formula, a: &Formula, b: &Formula) -> Formula {
    match (node.kind(), na.as_const(), nb.as_const()) {
        (Kind::And(..), Some(x), Some(y)) => Formula::constant(x && y),
        (Kind::Or(..), Some(x), Some(y)) => Formula::constant(x || y),
        (Kind::Xor(..), Some(x), Some(y)) => Formula::constant(x ^ y),
        (Kind::And(..), Some(false), None) | (Kind::And(..), None, Some(false)) => Formula::zero(),
        (Kind::And(..), Some(true), None) => nb,
        (Kind::And(..), None, Some(true)) => na,
        (Kind::Or(..), Some(true), None) | (Kind::Or(..), None, Some(true)) => Formula::one(),
        (Kind::Or(..), Some(false), None) => nb,
        (Kind::Or(..), None, Some(false)) => na,
        (Kind::Xor(..), Some(false), None) => nb,
        (Kind::Xor(..), None, Some(false)) => na,
        (Kind::Xor(..), Some(true), None) => nb.negate(),
        (Kind::Xor(..), None, Some(true)) => na.negate(),
        _ if na.ptr_eq(a) && nb.ptr_eq(b) => node.clone(),
        (Kind::And(..), ..) => na.and(&nb),
        (Kind::Or(..), ..) => na.or(&nb),
        (Kind::Xor(..), ..) => na.xor(&nb),
        _ => unreachable!("binary node"),
    }
}

/// Left-folded XOR; the empty list is `const0`.
pub fn xor_all<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Formula {
    let mut it = fs.into_iter();
    match it.next() {
        None => Formula::zero(),
        Some(first) => it.fold(first.clone(), |acc, f| acc.xor(f)),
    }
}

/// Left-folded OR; the empty list is `const0`.
pub fn or_all<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> Formula {
    let mut it = fs.into_iter();
    match it.next() {
        None => Formula::zero(),
        Some(first) => it.fold(first.clone(), |acc, f| acc.or(f)),
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || (self.0.hash == other.0.hash && self.0.kind == other.0.kind)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Tree-expanded printing can blow up on DAGs with heavy sharing.
const DISPLAY_NODE_LIMIT: usize = 4096;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &Formula, f: &mut fmt::Formatter<'_>, budget: &mut usize) -> fmt::Result {
            if *budget == 0 {
                return f.write_str("…");
            }
            *budget -= 1;
            match n.kind() {
                Kind::Const(b) => write!(f, "{}", *b as u8),
                Kind::Var(v) => write!(f, "{v}"),
                Kind::Not(a) => {
                    f.write_str("!")?;
                    go(a, f, budget)
                }
                Kind::And(a, b) | Kind::Or(a, b) | Kind::Xor(a, b) => {
                    let op = match n.kind() {
                        Kind::And(..) => " & ",
                        Kind::Or(..) => " | ",
                        _ => " ^ ",
                    };
                    f.write_str("(")?;
                    go(a, f, budget)?;
                    f.write_str(op)?;
                    go(b, f, budget)?;
                    f.write_str(")")
                }
            }
        }
        let mut budget = DISPLAY_NODE_LIMIT;
        go(self, f, &mut budget)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $ctor:ident) => {
        impl $tr for Formula {
            type Output = Formula;
            fn $m(self, rhs: Formula) -> Formula {
                Formula::$ctor(&self, &rhs)
            }
        }
        impl $tr<&Formula> for &Formula {
            type Output = Formula;
            fn $m(self, rhs: &Formula) -> Formula {
                Formula::$ctor(self, rhs)
            }
        }
    };
}

binop!(BitAnd, bitand, and);
binop!(BitOr, bitor, or);
binop!(BitXor, bitxor, xor);

impl Not for Formula {
    type Output = Formula;
    fn not(self) -> Formula {
        self.negate()
    }
}

impl Not for &Formula {
    type Output = Formula;
    fn not(self) -> Formula {
        self.negate()
    }
}

/// A (possibly partial) map from variables to bits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<VarId, bool>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: VarId, value: bool) {
        self.0.insert(x, value);
    }

    pub fn get(&self, x: &VarId) -> Option<bool> {
        self.0.get(x).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, bool)> {
        self.0.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Assignment over `vars` read from the low bits of `bits`, first variable = bit 0.
    pub fn from_bits<'a>(vars: impl IntoIterator<Item = &'a VarId>, bits: u64) -> Self {
        vars.into_iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), (bits >> i) & 1 == 1))
            .collect()
    }
}

impl FromIterator<(VarId, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (VarId, bool)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}
