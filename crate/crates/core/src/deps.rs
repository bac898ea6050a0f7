//! Functional dependencies and XOR-factorizable variables of a formula.
//!
//! `x` is essential in `f` when `f[0/x] ^ f[1/x]` is satisfiable, and is a
//! factor of `f` when that difference is a tautology, i.e. `f = x ^ f[0/x]`.
//! Every formula splits as `f = flin ^ fnl` where `flin` XORs all factors
//! and `fnl` is `f` with the factors pinned to 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::formula::{Formula, VarId};
use crate::sat::{is_satisfiable, is_tautology, BudgetExhausted, SolverBudget};

/// Exact variable sets of one formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisSets {
    /// Variables the formula functionally depends on.
    pub ess: BTreeSet<VarId>,
    /// Variables that XOR-factor out of the formula.
    pub fact: BTreeSet<VarId>,
    /// The formula with every factor set to 0.
    pub fnl: Formula,
    /// Essential variables of `fnl`; disjoint from `fact`.
    pub fnl_ess: BTreeSet<VarId>,
}

impl AnalysisSets {
    /// XOR of the factor variables.
    pub fn flin(&self) -> Formula {
        let vars: Vec<Formula> = self.fact.iter().cloned().map(Formula::var).collect();
        crate::formula::xor_all(&vars)
    }
}

fn difference(f: &Formula, x: &VarId) -> Formula {
    f.substitute(x, false).xor(&f.substitute(x, true))
}

pub fn is_essential(f: &Formula, x: &VarId, budget: SolverBudget) -> Result<bool, BudgetExhausted> {
    if !f.free_vars().contains(x) {
        return Ok(false);
    }
    Ok(is_satisfiable(&difference(f, x), budget)?.is_sat())
}

pub fn essential_vars(
    f: &Formula,
    budget: SolverBudget,
) -> Result<BTreeSet<VarId>, BudgetExhausted> {
    let mut ess = BTreeSet::new();
    for x in f.free_vars() {
        if is_satisfiable(&difference(f, &x), budget)?.is_sat() {
            ess.insert(x);
        }
    }
    Ok(ess)
}

pub fn is_factor(f: &Formula, x: &VarId, budget: SolverBudget) -> Result<bool, BudgetExhausted> {
    if !f.free_vars().contains(x) {
        return Ok(false);
    }
    is_tautology(&difference(f, x), budget)
}

pub fn factor_vars(f: &Formula, budget: SolverBudget) -> Result<BTreeSet<VarId>, BudgetExhausted> {
    let mut fact = BTreeSet::new();
    for x in f.free_vars() {
        if is_tautology(&difference(f, &x), budget)? {
            fact.insert(x);
        }
    }
    Ok(fact)
}

pub fn analyze(f: &Formula, budget: SolverBudget) -> Result<AnalysisSets, BudgetExhausted> {
    let fact = factor_vars(f, budget)?;
    let zeros: BTreeMap<VarId, bool> = fact.iter().map(|x| (x.clone(), false)).collect();
    let fnl = f.substitute_all(&zeros);
    let fnl_ess = essential_vars(&fnl, budget)?;
    let ess = fact.union(&fnl_ess).cloned().collect();
    Ok(AnalysisSets {
        ess,
        fact,
        fnl,
        fnl_ess,
    })
}

/// Memoizing front end for [`analyze`], one per verification task.
#[derive(Debug)]
pub struct Analyzer {
    budget: SolverBudget,
    cache: HashMap<Formula, AnalysisSets>,
}

impl Analyzer {
    pub fn new(budget: SolverBudget) -> Self {
        Analyzer {
            budget,
            cache: HashMap::new(),
        }
    }

    pub fn budget(&self) -> SolverBudget {
        self.budget
    }

    pub fn analyze(&mut self, f: &Formula) -> Result<AnalysisSets, BudgetExhausted> {
        if let Some(sets) = self.cache.get(f) {
            return Ok(sets.clone());
        }
        let sets = analyze(f, self.budget)?;
        self.cache.insert(f.clone(), sets.clone());
        Ok(sets)
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }
}
