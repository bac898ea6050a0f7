//! Tseitin encoding of formula DAGs into clause sets.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::formula::{Formula, Kind, VarId};

/// A solver literal: variable index in the upper bits, sign in bit 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, negated: bool) -> Self {
        Lit(var << 1 | negated as u32)
    }

    pub fn pos(var: u32) -> Self {
        Self::new(var, false)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "-{}", self.var() + 1)
        } else {
            write!(f, "{}", self.var() + 1)
        }
    }
}

/// An equisatisfiable clause set for one formula.
#[derive(Debug, Clone)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Solver variable of every formula variable.
    pub inputs: BTreeMap<VarId, u32>,
    /// Literal equivalent to the whole formula; asserted by a unit clause.
    pub root: Lit,
}

impl Cnf {
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&format!("{lit:?} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Encodes `f` with one auxiliary variable per distinct And/Or/Xor node.
///
/// Negation nodes reuse their child's literal with flipped sign; both
/// constants share a single auxiliary variable pinned to true.
pub fn to_cnf(f: &Formula) -> Cnf {
    let mut num_vars = 0u32;
    let mut fresh = || {
        let v = num_vars;
        num_vars += 1;
        v
    };
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut inputs: BTreeMap<VarId, u32> = BTreeMap::new();
    let mut lits: HashMap<usize, Lit> = HashMap::new();
    let mut truth: Option<Lit> = None;

    for node in f.postorder() {
        let lit = match node.kind() {
            Kind::Const(b) => {
                let t = *truth.get_or_insert_with(|| {
                    let t = Lit::pos(fresh());
                    clauses.push(vec![t]);
                    t
                });
                if *b {
                    t
                } else {
                    !t
                }
            }
            Kind::Var(v) => Lit::pos(*inputs.entry(v.clone()).or_insert_with(&mut fresh)),
            Kind::Not(a) => !lits[&a.node_id()],
            Kind::And(a, b) | Kind::Or(a, b) | Kind::Xor(a, b) => {
                let (x, y) = (lits[&a.node_id()], lits[&b.node_id()]);
                let t = Lit::pos(fresh());
                match node.kind() {
                    Kind::And(..) => {
                        clauses.push(vec![!t, x]);
                        clauses.push(vec![!t, y]);
                        clauses.push(vec![t, !x, !y]);
                    }
                    Kind::Or(..) => {
                        clauses.push(vec![t, !x]);
                        clauses.push(vec![t, !y]);
                        clauses.push(vec![!t, x, y]);
                    }
                    _ => {
                        clauses.push(vec![!t, x, y]);
                        clauses.push(vec![!t, !x, !y]);
                        clauses.push(vec![t, !x, y]);
                        clauses.push(vec![t, x, !y]);
                    }
                }
                t
            }
        };
        lits.insert(node.node_id(), lit);
    }

    let root = lits[&f.node_id()];
    clauses.push(vec![root]);
    Cnf {
        num_vars,
        clauses,
        inputs,
        root,
    }
}
