//! Satisfiability and tautology checks for formulas.
//!
//! Every symbolic question the checker asks ends up here: the formula is
//! Tseitin-encoded and handed to the in-crate CDCL solver.

pub mod cnf;
pub mod solver;

use thiserror::Error;

use crate::formula::{Assignment, Formula};
pub use cnf::{to_cnf, Cnf, Lit};
use solver::{Outcome, Solver};

/// Cap on solver decisions per query. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverBudget {
    pub max_decisions: Option<u64>,
}

impl SolverBudget {
    pub const UNLIMITED: SolverBudget = SolverBudget {
        max_decisions: None,
    };

    pub fn decisions(limit: u64) -> Self {
        SolverBudget {
            max_decisions: Some(limit),
        }
    }
}

/// The solver gave up before deciding a query.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("solver undecided: budget of {limit} decisions exhausted")]
pub struct BudgetExhausted {
    pub limit: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatVerdict {
    /// A model covering every free variable of the query.
    Sat(Assignment),
    Unsat,
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }
}

pub fn is_satisfiable(f: &Formula, budget: SolverBudget) -> Result<SatVerdict, BudgetExhausted> {
    if let Some(b) = f.as_const() {
        return Ok(if b {
            SatVerdict::Sat(Assignment::new())
        } else {
            SatVerdict::Unsat
        });
    }
    let cnf = to_cnf(f);
    let mut solver = Solver::new(cnf.num_vars);
    for clause in &cnf.clauses {
        solver.add_clause(clause);
    }
    match solver.solve(budget.max_decisions) {
        Outcome::Sat(values) => Ok(SatVerdict::Sat(
            cnf.inputs
                .iter()
                .map(|(x, &v)| (x.clone(), values[v as usize]))
                .collect(),
        )),
        Outcome::Unsat => Ok(SatVerdict::Unsat),
        Outcome::Exhausted => Err(BudgetExhausted {
            limit: budget.max_decisions.unwrap_or(u64::MAX),
        }),
    }
}

/// True iff `f` evaluates to 1 under every assignment.
pub fn is_tautology(f: &Formula, budget: SolverBudget) -> Result<bool, BudgetExhausted> {
    Ok(!is_satisfiable(&f.negate(), budget)?.is_sat())
}

/// True iff `f` is identically 0.
pub fn is_contradiction(f: &Formula, budget: SolverBudget) -> Result<bool, BudgetExhausted> {
    Ok(!is_satisfiable(f, budget)?.is_sat())
}

/// True iff `f` and `g` denote the same function.
pub fn equivalent(f: &Formula, g: &Formula, budget: SolverBudget) -> Result<bool, BudgetExhausted> {
    is_contradiction(&f.xor(g), budget)
}
